from sqlalchemy import Column, Integer, Float, String, JSON, DateTime
from sqlalchemy.orm import relationship
from sqlalchemy.sql import func
from coteach.database import Base


class Run(Base):
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)
    label = Column(String(100), nullable=False, index=True)
    algorithm = Column(String(50), nullable=False)
    domain = Column(String(20), nullable=False)
    seed = Column(Integer, nullable=False)
    reward_kind = Column(String(20), nullable=True)
    cost = Column(Float, default=0.0, nullable=False)
    v_bar = Column(Float, nullable=False)
    auc = Column(Float, nullable=False)
    normalized_auc = Column(Float, nullable=False)
    optimum = Column(Float, nullable=False)
    advice_i = Column(Integer, default=0, nullable=False)  # advice given by agent i
    advice_j = Column(Integer, default=0, nullable=False)
    config = Column(JSON, nullable=True)
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    # Relationships
    curve_points = relationship(
        "CurvePoint",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="CurvePoint.episode",
    )
