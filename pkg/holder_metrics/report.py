"""JSON and CSV emission of analysis reports.

Floats are written in their shortest round-trip form so identical runs give
identical bytes; non-finite values become the strings "inf", "-inf" and "nan".
Both formats are built from the same flattened scalars, so they agree field for field.
"""
import json
import math
from typing import Any, Iterator, List, Optional, Tuple

import pandas as pd

from holder_metrics.schemas import AnalysisReport

CSV_COLUMNS = ['check', 'bin', 'field', 'value']
SECTIONS = ('params', 'holder', 'hardy', 'hardy_bound', 'reduction', 'invariants')
# list entries are binned by the first of these keys they carry
BIN_KEYS = ('k', 'r', 'p', 'name')


def json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return 'nan'
        return 'inf' if value > 0 else '-inf'
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def report_dict(report: AnalysisReport) -> dict:
    data = json_safe(report.model_dump())
    # the wire name of an invariant's verdict
    for row in data.get('invariants', []):
        row['pass'] = row.pop('passed')
    return data


def to_json(report: AnalysisReport) -> str:
    return json.dumps(report_dict(report), indent=2, ensure_ascii=False, allow_nan=False) + '\n'


def _scalar_text(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, str):
        return value
    return json.dumps(value)


def _bin_label(item: Any, index: int) -> str:
    if isinstance(item, dict):
        for key in BIN_KEYS:
            if key in item and item[key] is not None:
                return f"{key}={_scalar_text(item[key])}"
    return str(index)


def _flatten(value: Any, path: str, bin_label: str) -> Iterator[Tuple[str, str, str]]:
    if isinstance(value, dict):
        for key, item in value.items():
            yield from _flatten(item, f"{path}.{key}" if path else key, bin_label)
    elif isinstance(value, list) and any(isinstance(v, dict) for v in value):
        for i, item in enumerate(value):
            label = _bin_label(item, i)
            yield from _flatten(item, path, f"{bin_label}/{label}" if bin_label else label)
    elif isinstance(value, list):
        # short numeric vectors such as points and per-depth constants
        for i, item in enumerate(value):
            yield bin_label, f"{path}[{i}]", _scalar_text(item)
    else:
        yield bin_label, path, _scalar_text(value)


def report_rows(report: AnalysisReport) -> List[Tuple[str, str, str, str]]:
    data = report_dict(report)
    rows = [('report', '', 'domain', data['domain']), ('report', '', 'version', data['version'])]
    for section in SECTIONS:
        value = data.get(section)
        if value is None or value == []:
            continue
        for bin_label, field_name, text in _flatten(value, '', ''):
            rows.append((section, bin_label, field_name, text))
    return rows


def to_csv(report: AnalysisReport) -> str:
    frame = pd.DataFrame(report_rows(report), columns=CSV_COLUMNS)
    return frame.to_csv(index=False, lineterminator='\n')


def render(report: AnalysisReport, fmt: str) -> str:
    if fmt == 'csv':
        return to_csv(report)
    return to_json(report)


def write_report(report: AnalysisReport, fmt: str, out: Optional[str] = None) -> str:
    """Render the report and write it to `out`, or return it for stdout"""
    text = render(report, fmt)
    if out:
        with open(out, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
    return text


def render_catalog(entries: List[dict], fmt: str) -> str:
    rows = json_safe(entries)
    if fmt == 'csv':
        frame = pd.DataFrame(rows, columns=['name', 'known_alpha', 'known_hardy', 'provenance'])
        return frame.to_csv(index=False, lineterminator='\n')
    return json.dumps(rows, indent=2, ensure_ascii=False, allow_nan=False) + '\n'
