"""Independent numpy/scipy computations whose outputs are frozen into the C++ tests.

Run: python3 tests/oracles/frozen_values.py
"""
import numpy as np
from scipy import stats


def read_stack(path):
    rows = [l.split() for l in open(path) if l.strip() and not l.lstrip().startswith("#")]
    n, d1, d2 = map(int, rows[0])
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    return data.reshape(n, d1, d2)


def marginals(x):
    a = x - x.mean(axis=0)
    n = len(a)
    c1 = np.einsum("mkl,mjl->kj", a, a) / n
    c2 = np.einsum("mkl,mkj->lj", a, a) / n
    return c1 / np.sqrt(np.trace(c1)), c2 / np.sqrt(np.trace(c2))


def eig_desc(m):
    w, v = np.linalg.eigh(m)
    return w[::-1], v[:, ::-1]


def sigma2(c1, c2, r, s):
    l, _ = eig_desc(c1)
    g, _ = eig_desc(c2)
    t1, t2 = np.trace(c1), np.trace(c2)
    h1, h2 = np.sum(c1 * c1), np.sum(c2 * c2)
    lr, gs = l[r - 1], g[s - 1]
    return 2 * lr**2 * gs**2 * (t1**2 + h1 - 2 * lr * t1) * (t2**2 + h2 - 2 * gs * t2) / (t1**2 * t2**2)


def sigma_lr(c1, c2, p, q):
    l, _ = eig_desc(c1)
    g, _ = eig_desc(c2)
    t1, t2 = np.trace(c1), np.trace(c2)
    h1, h2 = np.sum(c1 * c1), np.sum(c2 * c2)
    sl = np.array([[np.sqrt(2) * l[r] * l[k] * ((r == k) * t1**2 + h1 - (l[r] + l[k]) * t1) / (t1 * t2)
                    for k in range(p)] for r in range(p)])
    sr = np.array([[np.sqrt(2) * g[s] * g[k] * ((s == k) * t2**2 + h2 - (g[s] + g[k]) * t2) / (t1 * t2)
                    for k in range(q)] for s in range(q)])
    return sl, sr


def t_stat(x, r, s):
    c1, c2 = marginals(x)
    l, u = eig_desc(c1)
    g, v = eig_desc(c2)
    a = x - x.mean(axis=0)
    n = len(a)
    proj = np.einsum("k,mkl,l->m", u[:, r - 1], a, v[:, s - 1])
    return np.sqrt(n) * (np.mean(proj**2) - l[r - 1] * g[s - 1])


def inv_sqrt(m):
    w, v = np.linalg.eigh(m)
    return v @ np.diag(w**-0.5) @ v.T


def fmt(x):
    return repr(float(x))


if __name__ == "__main__":
    print("-- sigma_hat_sq, c1 = diag(2,1)/sqrt(3), c2 = diag(3,1)*sqrt(3)/4")
    c1 = np.diag([2.0, 1.0]) / np.sqrt(3)
    c2 = np.diag([3.0, 1.0]) * np.sqrt(3) / 4
    for r in (1, 2):
        for s in (1, 2):
            print(f"sigma2({r},{s}) =", fmt(sigma2(c1, c2, r, s)))

    print("-- sigma_hat_sq, c1 = diag(3,2,1)/sqrt(6), c2 = diag(4,1)*sqrt(6)/5")
    c1 = np.diag([3.0, 2.0, 1.0]) / np.sqrt(6)
    c2 = np.diag([4.0, 1.0]) * np.sqrt(6) / 5
    for r in (1, 2, 3):
        print(f"sigma2({r},1) =", fmt(sigma2(c1, c2, r, 1)))

    print("-- sigma_lr, c1 = diag(2,1)/sqrt(3), c2 = diag(3,2,1)*sqrt(3)/6")
    c1 = np.diag([2.0, 1.0]) / np.sqrt(3)
    c2 = np.diag([3.0, 2.0, 1.0]) * np.sqrt(3) / 6
    sl, sr = sigma_lr(c1, c2, 2, 3)
    print("sl =", [fmt(x) for x in sl.ravel()])
    print("sr =", [fmt(x) for x in sr.ravel()])

    print("-- tiny.txt pipeline")
    x = read_stack("tests/data/tiny.txt")
    c1, c2 = marginals(x)
    print("c1 =", [fmt(v) for v in c1.ravel()])
    print("c2 =", [fmt(v) for v in c2.ravel()])
    t11 = t_stat(x, 1, 1)
    s11 = sigma2(c1, c2, 1, 1)
    g = t11**2 / s11
    print("T(1,1) =", fmt(t11))
    print("sigma2(1,1) =", fmt(s11))
    print("G single =", fmt(g), " p =", fmt(stats.chi2.sf(g, 1)))
    # q = d2 would make sr singular (rows of T sum to zero), so use 2x1.
    tm = np.array([[t_stat(x, r, 1)] for r in (1, 2)])
    sl, sr = sigma_lr(c1, c2, 2, 1)
    gt = np.sum((inv_sqrt(sl) @ tm @ inv_sqrt(sr)) ** 2)
    print("T 2x1 =", [fmt(v) for v in tm.ravel()])
    print("G-tilde 2x1 =", fmt(gt), " p =", fmt(stats.chi2.sf(gt, 2)))
    d = np.einsum("mij,mkl->ijkl", x - x.mean(0), x - x.mean(0)) / len(x) - np.einsum("ik,jl->ijkl", c1, c2)
    print("HS =", fmt(np.sum(d * d)))

    print("-- chi-square survival values")
    for xv, df in [(3.841459, 1), (0.5, 1), (10.0, 4), (100.0, 40), (1e-8, 3), (60.0, 3), (250.0, 280)]:
        print(f"chi2_sf({xv}, {df}) =", fmt(stats.chi2.sf(xv, df)))
