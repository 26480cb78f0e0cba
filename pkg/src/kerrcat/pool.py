"""Ordered work pool.

Results always come back in input order, so any reduction over them is done
in a fixed order and is bitwise independent of the number of workers.
"""

from concurrent.futures import ThreadPoolExecutor


def ordered_map(fn, items, threads=1):
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=int(threads)) as ex:
        return list(ex.map(fn, items))
