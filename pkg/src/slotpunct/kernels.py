"""Hot inner loops, each with a numba build and a numpy/python fallback.

The public functions at the bottom dispatch on :func:`slotpunct._jit.use_numba`.
Both variants stay importable (``*_numpy`` / ``*_numba``) so tests and the
benchmark can compare them directly.
"""

from __future__ import annotations

import numpy as np

from slotpunct._jit import HAS_NUMBA, njit, use_numba

# Scores within this distance are treated as ties by the segmentation DP.
TIE_TOL = 1e-9


def _max_prob_route(codes, child_start, child_char, child_node, node_logp, floor_logp, tol):
    # Right-to-left DP over the dictionary DAG. ends[i] is the exclusive end of
    # the word chosen at i; ties go to the longer word.
    n = codes.shape[0]
    best = np.zeros(n + 1, dtype=np.float64)
    ends = np.empty(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        best_score = floor_logp + best[i + 1]
        best_end = i + 1
        have_word = False
        node = 0
        j = i
        while j < n:
            c = codes[j]
            if c < 0:
                break
            lo = child_start[node]
            hi = child_start[node + 1]
            # binary search among the sorted children of node
            while lo < hi:
                mid = (lo + hi) // 2
                if child_char[mid] < c:
                    lo = mid + 1
                else:
                    hi = mid
            if lo == child_start[node + 1] or child_char[lo] != c:
                break
            node = child_node[lo]
            lp = node_logp[node]
            if lp == lp:  # not NaN: node ends a lexicon word
                score = lp + best[j + 1]
                if not have_word:
                    if j == i or score >= best_score - tol:
                        best_score = score
                        best_end = j + 1
                    have_word = True
                elif score >= best_score - tol:
                    best_score = score
                    best_end = j + 1
            j += 1
        best[i] = best_score
        ends[i] = best_end
    return ends, best


max_prob_route_numpy = _max_prob_route
max_prob_route_numba = njit(_max_prob_route) if HAS_NUMBA else None


def confusion_counts_numpy(pred: np.ndarray, ref: np.ndarray, n_classes: int = 4) -> np.ndarray:
    """Return an ``(n_classes, 3)`` array of (tp, fp, fn); row 0 (O) stays zero."""
    pred = np.asarray(pred, dtype=np.int64)
    ref = np.asarray(ref, dtype=np.int64)
    matrix = np.bincount(ref * n_classes + pred, minlength=n_classes * n_classes)
    matrix = matrix.reshape(n_classes, n_classes)
    tp = np.diag(matrix).copy()
    fp = matrix.sum(axis=0) - tp
    fn = matrix.sum(axis=1) - tp
    out = np.stack([tp, fp, fn], axis=1)
    out[0] = 0
    return out


def _confusion_counts_loop(pred, ref, n_classes):
    out = np.zeros((n_classes, 3), dtype=np.int64)
    for k in range(pred.shape[0]):
        p = pred[k]
        r = ref[k]
        if p == r:
            if p != 0:
                out[p, 0] += 1
        else:
            if p != 0:
                out[p, 1] += 1
            if r != 0:
                out[r, 2] += 1
    return out


_confusion_counts_jit = njit(_confusion_counts_loop) if HAS_NUMBA else None


def confusion_counts_numba(pred: np.ndarray, ref: np.ndarray, n_classes: int = 4) -> np.ndarray:
    return _confusion_counts_jit(
        np.ascontiguousarray(pred, dtype=np.int64), np.ascontiguousarray(ref, dtype=np.int64), n_classes
    )


def assign_windows_numpy(slot_pos: np.ndarray, win_start: np.ndarray, win_end: np.ndarray) -> np.ndarray:
    """For every slot pick the covering window in which it sits most centrally.

    ``slot_pos`` are token offsets, windows are half-open ``[start, end)`` token
    ranges sorted by start with non-decreasing ends. Centrality is the distance
    to the nearer window edge; ties go to the earlier window. Slots covered by
    no window get -1.
    """
    pos = np.asarray(slot_pos, dtype=np.int64)
    start = np.asarray(win_start, dtype=np.int64)
    end = np.asarray(win_end, dtype=np.int64)
    out = np.full(pos.shape[0], -1, dtype=np.int64)
    if not pos.size or not start.size:
        return out
    # covering windows of p form the contiguous run [lo, hi)
    lo = np.searchsorted(end, pos, side="right")
    hi = np.searchsorted(start, pos, side="right")
    best = np.full(pos.shape[0], -1, dtype=np.int64)
    for k in range(int(np.max(hi - lo, initial=0))):
        w = lo + k
        live = w < hi
        wi = np.where(live, w, 0)
        c = np.minimum(pos - start[wi], end[wi] - 1 - pos)
        better = live & (c > best)
        best[better] = c[better]
        out[better] = w[better]
    return out


def _assign_windows_loop(slot_pos, win_start, win_end):
    n = slot_pos.shape[0]
    out = np.full(n, -1, dtype=np.int64)
    first = 0
    for s in range(n):
        p = slot_pos[s]
        best = -1
        # windows are sorted by start; skip those that ended before p
        while first < win_start.shape[0] and win_end[first] <= p:
            first += 1
        w = first
        while w < win_start.shape[0] and win_start[w] <= p:
            if p < win_end[w]:
                c = min(p - win_start[w], win_end[w] - 1 - p)
                if c > best:
                    best = c
                    out[s] = w
            w += 1
    return out


_assign_windows_jit = njit(_assign_windows_loop) if HAS_NUMBA else None


def assign_windows_numba(slot_pos: np.ndarray, win_start: np.ndarray, win_end: np.ndarray) -> np.ndarray:
    # requires slot_pos ascending and windows sorted by start with ascending ends
    return _assign_windows_jit(
        np.ascontiguousarray(slot_pos, dtype=np.int64),
        np.ascontiguousarray(win_start, dtype=np.int64),
        np.ascontiguousarray(win_end, dtype=np.int64),
    )


def max_prob_route(codes, child_start, child_char, child_node, node_logp, floor_logp, tol=TIE_TOL):
    fn = max_prob_route_numba if use_numba() else max_prob_route_numpy
    return fn(codes, child_start, child_char, child_node, node_logp, floor_logp, tol)


def confusion_counts(pred, ref, n_classes: int = 4) -> np.ndarray:
    if use_numba():
        return confusion_counts_numba(pred, ref, n_classes)
    return confusion_counts_numpy(pred, ref, n_classes)


def assign_windows(slot_pos, win_start, win_end) -> np.ndarray:
    if use_numba():
        return assign_windows_numba(slot_pos, win_start, win_end)
    return assign_windows_numpy(slot_pos, win_start, win_end)
