"""Excel exporter for experiment reports."""

import logging
from datetime import datetime
from pathlib import Path
from typing import List, Sequence

from openpyxl import Workbook
from openpyxl.styles import Alignment, Font, PatternFill

from src.services.report import ReportRow, rename_deltas

logger = logging.getLogger(__name__)

VARIANT_LABELS = {'metrics': 'Metrics', 'tok-u': 'Tok-U', 'tok-ub': 'Tok-UB', 'mix': 'Mix'}


class ReportExporter:
    """Exports report rows to a formatted Excel workbook."""

    def __init__(self, output_dir: str = "reports"):
        """
        Initialize the exporter.

        Args:
            output_dir: Directory for workbooks given without a directory
        """
        self.output_dir = Path(output_dir)

    def export_workbook(self, rows: Sequence[ReportRow], filename=None) -> Path:
        """
        Write performance, robustness and efficiency sheets.

        Args:
            rows: Report rows of one or more runs
            filename: Workbook path (default: vultriage_report_<timestamp>.xlsx)

        Returns:
            Path to created workbook
        """
        if filename is None:
            timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
            filepath = self.output_dir / f"vultriage_report_{timestamp}.xlsx"
        else:
            filepath = Path(filename)
        filepath.parent.mkdir(parents=True, exist_ok=True)

        logger.info(f"Creating Excel report: {filepath}")

        wb = Workbook()
        wb.remove(wb.active)

        self._create_overview_sheet(wb, rows)
        self._create_performance_sheet(wb, [r for r in rows if not r.renamed])
        self._create_robustness_sheet(wb, rows)
        self._create_efficiency_sheet(wb, rows)

        wb.save(filepath)
        logger.info(f"Excel file created: {filepath}")
        return filepath

    def _create_overview_sheet(self, wb: Workbook, rows: Sequence[ReportRow]):
        ws = wb.create_sheet("Overview", 0)

        ws['A1'] = "Vulnerability Triage Report"
        ws['A1'].font = Font(size=16, bold=True)

        ws['A3'] = "Export Date:"
        ws['B3'] = datetime.now().strftime('%Y-%m-%d %H:%M:%S')

        stats = [
            ("Report Rows", len(rows)),
            ("Settings", ', '.join(sorted({r.setting for r in rows}))),
            ("Variants", ', '.join(sorted({VARIANT_LABELS.get(r.variant, r.variant) for r in rows}))),
            ("Renamed Rows", sum(1 for r in rows if r.renamed)),
            ("Timings Comparable", 'Yes' if all(r.timings_comparable for r in rows) else 'No'),
        ]

        row = 5
        for label, value in stats:
            ws[f'A{row}'] = label
            ws[f'B{row}'] = value
            ws[f'A{row}'].font = Font(bold=True)
            row += 1

        if rows:
            best = max((r for r in rows if not r.renamed), key=lambda r: r.pr_auc, default=None)
            if best is not None:
                row += 1
                ws[f'A{row}'] = "Best PR-AUC"
                ws[f'B{row}'] = f"{best.pr_auc:.3f} ({best.setting}, {VARIANT_LABELS.get(best.variant, best.variant)})"
                ws[f'A{row}'].font = Font(bold=True)

        ws.column_dimensions['A'].width = 25
        ws.column_dimensions['B'].width = 40

    def _create_performance_sheet(self, wb: Workbook, rows: List[ReportRow]):
        ws = wb.create_sheet("Performance")

        headers = ['Setting', 'Variant', 'PR-AUC', 'ROC-AUC', 'F1', 'Precision', 'Recall', 'R@k']
        self._write_header_row(ws, headers)

        for idx, r in enumerate(rows, start=2):
            values = [r.setting, VARIANT_LABELS.get(r.variant, r.variant),
                      r.pr_auc, r.roc_auc, r.f1, r.precision, r.recall, r.recall_at_k]
            self._write_row(ws, idx, values)

        self._auto_adjust_columns(ws)
        logger.debug(f"Created Performance sheet with {len(rows)} rows")

    def _create_robustness_sheet(self, wb: Workbook, rows: Sequence[ReportRow]):
        ws = wb.create_sheet("Robustness")

        headers = ['Setting', 'Variant', 'PR-AUC orig', 'PR-AUC rename', 'Delta',
                   'R@k orig', 'R@k rename', 'Delta']
        self._write_header_row(ws, headers)

        deltas = rename_deltas(rows)
        for idx, d in enumerate(deltas, start=2):
            values = [d.setting, VARIANT_LABELS.get(d.variant, d.variant),
                      d.pr_auc_orig, d.pr_auc_renamed, d.pr_auc_delta,
                      d.recall_at_k_orig, d.recall_at_k_renamed, d.recall_at_k_delta]
            self._write_row(ws, idx, values)

        self._auto_adjust_columns(ws)
        logger.debug(f"Created Robustness sheet with {len(deltas)} rows")

    def _create_efficiency_sheet(self, wb: Workbook, rows: Sequence[ReportRow]):
        ws = wb.create_sheet("Efficiency")

        headers = ['Setting', 'Variant', 'Renamed', 'Feat. time (s)', 'Train time (s)',
                   'Infer. time (s)', 'n_train/n_test', 'Features']
        self._write_header_row(ws, headers)

        for idx, r in enumerate(rows, start=2):
            values = [r.setting, VARIANT_LABELS.get(r.variant, r.variant), 'Yes' if r.renamed else 'No',
                      round(r.feat_time_s, 2), round(r.train_time_s, 2), round(r.infer_time_s, 2),
                      f"{r.n_train}/{r.n_test}", r.n_features]
            self._write_row(ws, idx, values)

        self._auto_adjust_columns(ws)
        logger.debug(f"Created Efficiency sheet with {len(rows)} rows")

    def _write_row(self, ws, row_number: int, values: list):
        for col_num, value in enumerate(values, start=1):
            cell = ws.cell(row=row_number, column=col_num)
            cell.value = round(value, 3) if isinstance(value, float) and abs(value) < 10 else value

    def _write_header_row(self, ws, headers: List[str]):
        """Write and format header row."""
        header_fill = PatternFill(start_color="366092", end_color="366092", fill_type="solid")
        header_font = Font(color="FFFFFF", bold=True)
        header_alignment = Alignment(horizontal="center", vertical="center")

        for col_num, header in enumerate(headers, start=1):
            cell = ws.cell(row=1, column=col_num)
            cell.value = header
            cell.fill = header_fill
            cell.font = header_font
            cell.alignment = header_alignment

        ws.freeze_panes = 'A2'

    def _auto_adjust_columns(self, ws):
        """Auto-adjust column widths based on content."""
        for column_cells in ws.columns:
            max_length = max((len(str(cell.value)) for cell in column_cells if cell.value is not None), default=0)
            ws.column_dimensions[column_cells[0].column_letter].width = min(max_length + 2, 50)


def export_workbook(rows: Sequence[ReportRow], path) -> Path:
    """Write rows to an Excel workbook at path."""
    return ReportExporter().export_workbook(rows, path)
