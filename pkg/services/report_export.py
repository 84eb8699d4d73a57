"""
Report Export
JSON, text-table, CSV and Excel output for design and metrology reports
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence

import pandas as pd

from .design_analytics import DesignReport
from .frame_io import CSV_LINE_TERMINATOR

DEFAULT_SHEETS = {'comparison': 'Comparison', 'inputs': 'Inputs'}


class ReportExporter:
    """Writes design reports and sweeps to disk"""

    def __init__(self, log_callback: Callable = None, sheet_names: Optional[Dict[str, str]] = None):
        self.logger = logging.getLogger(__name__)
        self.log_callback = log_callback or self._default_log
        self.sheet_names = {**DEFAULT_SHEETS, **(sheet_names or {})}

    def _default_log(self, message: str, level: str = "info"):
        """Default logging function"""
        if level == "error":
            self.logger.error(message)
        elif level == "warn":
            self.logger.warning(message)
        else:
            self.logger.info(message)

    @staticmethod
    def reports_frame(reports: Sequence[DesignReport]) -> pd.DataFrame:
        rows = []
        for report in reports:
            row = {
                'Setup': report.label,
                'Configuration': report.configuration.value,
                'res_FWHM_um': report.res_fwhm * 1e6,
                'FoV_mm': report.fov * 1e3,
                'Modes_per_direction': report.modes_per_direction,
            }
            for key, value in report.experiment.items():
                row[f'Experiment_{key}'] = value
            rows.append(row)
        return pd.DataFrame(rows)

    def export_excel(self, reports: Sequence[DesignReport], filename: str) -> bool:
        """Workbook with a formatted comparison sheet and an inputs sheet"""
        try:
            df = self.reports_frame(reports)
            inputs = pd.DataFrame([{'Setup': r.label, **r.inputs, **r.extras} for r in reports])

            comparison_sheet = self.sheet_names['comparison']
            inputs_sheet = self.sheet_names['inputs']

            with pd.ExcelWriter(filename, engine='xlsxwriter') as writer:
                df.to_excel(writer, sheet_name=comparison_sheet, index=False)
                inputs.to_excel(writer, sheet_name=inputs_sheet, index=False)

                workbook = writer.book
                header_format = workbook.add_format({
                    'bold': True,
                    'text_wrap': True,
                    'valign': 'top',
                    'fg_color': '#D7E4BC',
                    'border': 1
                })
                for sheet_name, frame in ((comparison_sheet, df), (inputs_sheet, inputs)):
                    worksheet = writer.sheets[sheet_name]
                    for col_num, value in enumerate(frame.columns.values):
                        worksheet.write(0, col_num, value, header_format)
                    for i, col in enumerate(frame.columns):
                        column_len = max(frame[col].astype(str).str.len().max(), len(col)) + 2
                        worksheet.set_column(i, i, min(column_len, 50))

            self.log_callback(f"Excel report written: {filename}", "info")
            return True
        except Exception as e:
            self.log_callback(f"Error exporting to Excel: {e}", "error")
            return self.export_csv_fallback(reports, filename.rsplit('.', 1)[0] + '.csv')

    def export_csv_fallback(self, reports: Sequence[DesignReport], filename: str) -> bool:
        try:
            self.reports_frame(reports).to_csv(filename, index=False, lineterminator=CSV_LINE_TERMINATOR)
            self.log_callback(f"CSV report written instead: {filename}", "warn")
            return True
        except OSError as e:
            self.log_callback(f"Error exporting to CSV: {e}", "error")
            return False

    def export_sweep_csv(self, sweep: pd.DataFrame, filename: str) -> bool:
        try:
            sweep.to_csv(filename, index=False, float_format='%.17g', lineterminator=CSV_LINE_TERMINATOR)
            self.log_callback(f"Sweep written: {filename} ({len(sweep)} rows)", "info")
            return True
        except OSError as e:
            self.log_callback(f"Error writing sweep: {e}", "error")
            return False


def _round_sig(value: float, digits: int = 3) -> float:
    if value == 0 or not math.isfinite(value):
        return value
    return round(value, digits - 1 - int(math.floor(math.log10(abs(value)))))


def _length(value_m: float) -> str:
    if value_m >= 1e-3:
        return f"{_round_sig(value_m * 1e3):g} mm"
    return f"{_round_sig(value_m * 1e6):g} µm"


def format_text_table(reports: Sequence[DesignReport]) -> str:
    """Rows res/FoV/m against one column per setup, three significant digits"""
    headers = [f"{r.label or r.configuration.value} ({r.configuration.value})" for r in reports]
    rows = [
        ('res FWHM', [_length(r.res_fwhm) for r in reports]),
        ('FoV', [_length(r.fov) for r in reports]),
        ('m', [f"{round(r.modes_per_direction):d}" for r in reports]),
    ]
    width = max([len(h) for h in headers] + [12])
    lines: List[str] = [' ' * 10 + ''.join(h.rjust(width + 2) for h in headers)]
    for name, values in rows:
        lines.append(name.ljust(10) + ''.join(v.rjust(width + 2) for v in values))
    notes = sorted({note for r in reports for note in r.footnotes})
    for i, note in enumerate(notes, start=1):
        lines.append(f"[{i}] {note}")
    return '\n'.join(lines) + '\n'
