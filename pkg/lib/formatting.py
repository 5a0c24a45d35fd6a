"""
Row output for the CLI and the service.

Numbers are written with a fixed number of significant digits (15 by
default) and a '.' decimal separator regardless of locale.
"""

import csv
import io
import json
import math

DEFAULT_DIGITS = 15


def format_number(value, digits=DEFAULT_DIGITS):
    """Locale-independent text for a number; integers and strings pass through."""
    if isinstance(value, bool) or value is None:
        return '' if value is None else str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) or hasattr(value, 'item'):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return format(value, f'.{digits}g')
    return str(value)


def rounded(value, digits=DEFAULT_DIGITS):
    """value rounded to the given significant digits, for JSON output."""
    if isinstance(value, float) and math.isfinite(value):
        return float(format(value, f'.{digits}g'))
    if hasattr(value, 'item'):
        return rounded(value.item(), digits)
    return value


def rows_to_csv(columns, rows, digits=DEFAULT_DIGITS):
    """CSV text with a header row and the given column order."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row[column], digits) for column in columns])
    return buffer.getvalue()


def rows_to_json(columns, rows, digits=DEFAULT_DIGITS):
    """JSON array of objects with keys in column order."""
    records = [{column: rounded(row[column], digits) for column in columns} for row in rows]
    return json.dumps(records, indent=2) + '\n'


def render_rows(columns, rows, output_format='csv', digits=DEFAULT_DIGITS):
    if output_format == 'json':
        return rows_to_json(columns, rows, digits)
    return rows_to_csv(columns, rows, digits)


def parse_csv(text):
    """Parse rows_to_csv output back into dictionaries of floats where possible."""
    reader = csv.DictReader(io.StringIO(text))
    parsed = []
    for record in reader:
        row = {}
        for key, value in record.items():
            try:
                row[key] = float(value)
            except ValueError:
                row[key] = value
        parsed.append(row)
    return parsed
