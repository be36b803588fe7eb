"""Pure numpy fallback for the compiled kernels; results are bit-identical."""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_CHUNK = 1 << 18


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed):
    with np.errstate(over="ignore"):
        z = np.uint64(int(seed) % (1 << 64)) * _GOLDEN + _GOLDEN
        return int(_mix(np.asarray(z, dtype=np.uint64)))


def _uniform(key, index):
    with np.errstate(over="ignore"):
        z = np.uint64(key) + (index + np.uint64(1)) * _GOLDEN
        return (_mix(z) >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def uniforms(key, start, count):
    index = np.uint64(start) + np.arange(count, dtype=np.uint64)
    return _uniform(key, index)


def walsh_max(table):
    w = np.array(table, dtype=np.int64, copy=True)
    size = w.shape[0]
    if size == 0 or size & (size - 1):
        raise ValueError("table length must be a power of two")
    h = 1
    while h < size:
        v = w.reshape(-1, 2, h)
        a = v[:, 0, :].copy()
        b = v[:, 1, :]
        v[:, 0, :] += b
        v[:, 1, :] = a - b
        h *= 2
    arg = int(np.argmax(w))
    return int(w[arg]), arg


def mc_count_positive(cdf, thresholds, trials, seed):
    cdf = np.ascontiguousarray(cdf, dtype=np.float64)
    thresholds = np.ascontiguousarray(thresholds, dtype=np.float64)
    m = cdf.shape[0]
    n = thresholds.shape[1]
    key = stream_key(seed)
    stride = np.uint64(n + 1)
    positive = 0
    for start in range(0, trials, _CHUNK):
        t = np.arange(start, min(start + _CHUNK, trials), dtype=np.uint64)
        base = t * stride
        lam = np.minimum(np.searchsorted(cdf, _uniform(key, base), side="right"), m - 1)
        parity = np.zeros(t.shape[0], dtype=np.int8)
        for i in range(n):
            u = _uniform(key, base + np.uint64(1 + i))
            parity ^= (~(u < thresholds[lam, i])).astype(np.int8)
        positive += int(np.count_nonzero(parity == 0))
    return positive
