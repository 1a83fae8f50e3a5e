"""Spreadsheet export of stored runs."""
import logging
from pathlib import Path
from typing import Optional, Union

import pandas as pd
from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter
from sqlalchemy.orm import Session

from coteach.services.results_store import list_runs, run_rows

logger = logging.getLogger(__name__)

RUN_HEADERS = ["label", "algorithm", "domain", "seed", "reward_kind", "cost",
               "v_bar", "auc", "normalized_auc", "advice_i", "advice_j"]
SUMMARY_HEADERS = ["label", "runs", "v_bar_mean", "v_bar_std", "auc_mean", "auc_std",
                   "normalized_auc_mean", "normalized_auc_std"]
CURVE_HEADERS = ["label", "seed", "episode", "greedy_return", "training_return",
                 "advice_rate_i", "advice_rate_j"]


def summarize(rows: list) -> pd.DataFrame:
    df = pd.DataFrame(rows, columns=RUN_HEADERS)
    if df.empty:
        return pd.DataFrame(columns=SUMMARY_HEADERS)
    grouped = df.groupby("label", sort=True)
    summary = grouped.agg(
        runs=("seed", "count"),
        v_bar_mean=("v_bar", "mean"),
        v_bar_std=("v_bar", "std"),
        auc_mean=("auc", "mean"),
        auc_std=("auc", "std"),
        normalized_auc_mean=("normalized_auc", "mean"),
        normalized_auc_std=("normalized_auc", "std"),
    ).reset_index()
    return summary.fillna(0.0)[SUMMARY_HEADERS]


def _write_sheet(wb: Workbook, title: str, headers: list, rows) -> None:
    header_fill = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
    header_font = Font(bold=True, color="FFFFFF", size=11)
    center_align = Alignment(horizontal="center", vertical="center")
    thin_border = Border(
        left=Side(style='thin'),
        right=Side(style='thin'),
        top=Side(style='thin'),
        bottom=Side(style='thin')
    )

    ws = wb.create_sheet(title)
    ws.append(headers)
    for col_num in range(1, len(headers) + 1):
        cell = ws.cell(row=1, column=col_num)
        cell.font = header_font
        cell.fill = header_fill
        cell.alignment = center_align
        cell.border = thin_border

    for row in rows:
        ws.append([v.item() if hasattr(v, "item") else v for v in row])
    for row in ws.iter_rows(min_row=2, max_row=ws.max_row):
        for cell in row:
            cell.border = thin_border
            if isinstance(cell.value, float):
                cell.number_format = "0.0000"

    for col in range(1, len(headers) + 1):
        ws.column_dimensions[get_column_letter(col)].width = 15


def export_workbook(db: Session, out_dir: Union[str, Path], label: Optional[str] = None) -> Path:
    """Write results.xlsx with the Runs, Summary and Curves sheets."""
    runs = list_runs(db, label)
    rows = run_rows(runs)

    wb = Workbook()
    wb.remove(wb.active)  # Remove default sheet

    _write_sheet(wb, "Runs", RUN_HEADERS, ([r[h] for h in RUN_HEADERS] for r in rows))
    summary = summarize(rows)
    _write_sheet(wb, "Summary", SUMMARY_HEADERS, summary.itertuples(index=False))
    curve_rows = (
        [run.label, run.seed, p.episode, p.greedy_return, p.training_return, p.advice_rate_i, p.advice_rate_j]
        for run in runs
        for p in run.curve_points
    )
    _write_sheet(wb, "Curves", CURVE_HEADERS, curve_rows)

    path = Path(out_dir) / "results.xlsx"
    path.parent.mkdir(parents=True, exist_ok=True)
    wb.save(path)
    logger.info(f"Exported {len(rows)} runs to {path}")
    return path
