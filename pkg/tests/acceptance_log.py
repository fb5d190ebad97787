"""Result lines collected by the acceptance tests and echoed in the pytest summary."""

LINES: list[str] = []


def record(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    return passed
