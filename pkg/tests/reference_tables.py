"""Expected route tables for the bundled fixtures (test data only)."""

_PRIMARY_ROWS = {
    1: "- 1-2 1-4-3 1-4 1-2-5 1-2-5-6 1-4-8-7 1-4-8",
    2: "2-1 - 2-3 2-1-4 2-5 2-5-6 2-5-6-7 2-1-4-8",
    3: "3-4-1 3-2 - 3-4 3-2-5 3-2-5-6 3-4-8-7 3-4-8",
    4: "4-1 4-1-2 4-3 - 4-1-2-5 4-1-2-5-6 4-8-7 4-8",
    5: "5-2-1 5-2 5-2-3 5-2-1-4 - 5-6 5-6-7 5-2-1-4-8",
    6: "6-5-2-1 6-5-2 6-5-2-3 6-5-2-1-4 6-5 - 6-7 6-7-8",
    7: "7-8-4-1 7-6-5-2 7-8-4-3 7-8-4 7-6-5 7-6 - 7-8",
    8: "8-4-1 8-4-1-2 8-4-3 8-4 8-4-1-2-5 8-7-6 8-7 -",
}

_SECONDARY_ROWS = {
    1: "- 1-2 1-4-3 1-4 1-2-5 1-2-5-6 1-4-8-7 1-4-8",
    2: "2-1 - 2-3 2-1-4 2-5 2-5-6 2-5-6-7 2-1-4-8",
    3: "3-2-1 3-2 - 3-2-1-4 3-2-5 3-2-5-6 3-2-5-6-7 3-2-1-4-8",
    4: "4-1 4-1-2 4-1-2-3 - 4-1-2-5 4-1-2-5-6 4-1-2-5-6-7 4-8",
    5: "5-2-1 5-2 5-2-3 5-2-1-4 - 5-6 5-6-7 5-2-1-4-8",
    6: "6-5-2-1 6-5-2 6-5-2-3 6-5-2-1-4 6-5 - 6-7 6-5-2-1-4-8",
    7: "7-6-5-2-1 7-6-5-2 7-6-5-2-3 7-6-5-2-1-4 7-6-5 7-6 - 7-6-5-2-1-4-8",
    8: "8-4-1 8-4-1-2 8-4-1-2-3 8-4 8-4-1-2-5 8-4-1-2-5-6 8-4-1-2-5-6-7 -",
}


def _parse(rows):
    table = {}
    for src, row in rows.items():
        for dst, cell in enumerate(row.split(), 1):
            if cell != "-":
                table[(src, dst)] = tuple(int(n) for n in cell.split("-"))
    return table


EIGHT_PRIMARY = _parse(_PRIMARY_ROWS)
EIGHT_SECONDARY = _parse(_SECONDARY_ROWS)
EIGHT_CHANGED = {p for p in EIGHT_PRIMARY if EIGHT_PRIMARY[p] != EIGHT_SECONDARY[p]}
# Secondary cells that keep a degraded link although a cheaper detour exists.
EIGHT_ERRATA = {(1, 3), (1, 7)}
EIGHT_DEGRADED_LINKS = [(3, 4), (7, 8)]

# (src, dst): (primary path, primary reward, secondary path, secondary reward)
TOKYO_ROUTES = {
    (1, 22): ((1, 6, 7, 22), -123.55, (1, 5, 18, 21, 22), -151.00),
    (4, 7): ((4, 1, 6, 7), -121.88, (4, 5, 18, 21, 7), -157.61),
    (4, 11): ((4, 13, 10, 11), -121.01, (4, 13, 12, 11), -122.83),
    (1, 19): ((1, 4, 16, 19), -101.81, (1, 5, 16, 19), -108.21),
}
TOKYO_DEGRADED_LINKS = [(1, 6), (1, 4), (10, 11)]
