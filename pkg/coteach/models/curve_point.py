from sqlalchemy import Column, Integer, Float, ForeignKey
from sqlalchemy.orm import relationship
from coteach.database import Base


class CurvePoint(Base):
    __tablename__ = "curve_points"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("runs.id"), nullable=False, index=True)
    episode = Column(Integer, nullable=False)
    greedy_return = Column(Float, nullable=False)
    training_return = Column(Float, nullable=True)
    advice_rate_i = Column(Float, default=0.0, nullable=False)
    advice_rate_j = Column(Float, default=0.0, nullable=False)

    run = relationship("Run", back_populates="curve_points")
