import csv


class CsvFormatError(ValueError):
    pass


def fmt(x):
    """Shortest round-trip text for numbers; ints and strings pass through."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    if hasattr(x, "item"):
        return fmt(x.item())
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
            w.writerow([fmt(x) for x in row])


def read_numeric_csv(path):
    """Return ``(header, columns)`` with every column parsed as float.

    Raises :class:`CsvFormatError` naming the offending row (1-based, header
    is row 1).
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file, missing header row") from None
        if not header or any(not h.strip() for h in header):
            raise CsvFormatError(f"{path}: row 1: empty column name")
        cols = [[] for _ in header]
        for rowno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: row {rowno}: expected {len(header)} fields, got {len(row)}")
            for i, cell in enumerate(row):
                try:
                    cols[i].append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: row {rowno}: non-numeric value {cell!r} in column {header[i]!r}"
                    ) from None
    return header, cols
