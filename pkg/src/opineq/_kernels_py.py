"""Pure-numpy implementation of the hot quadrature kernels.

Same contract as the compiled `_ckernels` module; selected by
`opineq.kernels` when the extension is unavailable or disabled.

The one primitive is the polar reduction integral

    I(um1, eta) = int_0^pi  sin^w(t) * c(m t) / ((um1 + 2 sin^2(t/2))^p + eta) dt

with c = cos or (1 - cos), evaluated for a whole batch of (um1, eta)
pairs at once.  um1 stands for u - 1 >= 0 so that the near-singular
regime u -> 1 keeps full relative precision.

Strategy: split at pi/2 and map each half to v in [0, 1] through
t = (pi/2) v^q (resp. pi - (pi/2) v^q).  The exponent q flattens the
sin^w endpoint factor; the u ~ 1 peak is resolved by shared adaptive
Gauss-Kronrod panels refined where any batch element still needs it.
"""

import numpy as np

backend_name = "python"

# Gauss7/Kronrod15 nodes and weights on [-1, 1].
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])
_GIDX = np.arange(1, 15, 2)

_HALF_PI = 0.5 * np.pi


def _eval_panels(a, b, region, q, p, w, m, omc, um1, eta):
    """GK15 on panels [a_j, b_j]; returns (vals, errs) of shape (npanel, ne)."""
    a = a[:, None]
    b = b[:, None]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    v = mid + half * _XK[None, :]                     # (np, 15)
    theta = _HALF_PI * v ** q
    jac = _HALF_PI * q * v ** (q - 1.0)
    if region == 1:
        theta = np.pi - theta
    # integrand factors, broadcast to (np, 15, ne)
    s2 = 2.0 * np.sin(0.5 * theta) ** 2
    den = (um1[None, None, :] + s2[:, :, None]) ** p + eta[None, None, :]
    f = jac[:, :, None] / den
    if w != 0.0:
        f = f * (np.sin(theta) ** w)[:, :, None]
    if m != 0:
        cosm = np.cos(m * theta)
        f = f * ((1.0 - cosm) if omc else cosm)[:, :, None]
    elif omc:
        f = np.zeros_like(f)
    ik = np.einsum("k,pke->pe", _WK, f)
    ig = np.einsum("k,pke->pe", _WG, f[:, _GIDX, :])
    vals = ik * half[:, 0:1]
    errs = np.abs(ik - ig) * half[:, 0:1]
    return vals, errs


def polar_batch(p, w, m, um1, eta, tol=1e-11, one_minus_cos=False,
                max_panels=800, chunk=2048):
    """Batched polar integral; returns (values, abs_errors, n_evaluations)."""
    um1 = np.atleast_1d(np.asarray(um1, dtype=float))
    eta = np.broadcast_to(np.asarray(eta, dtype=float), um1.shape).copy()
    ne = um1.size
    out_v = np.empty(ne)
    out_e = np.empty(ne)
    nev = 0
    q = max(2.0, 2.0 / (w + 1.0))
    for lo in range(0, ne, chunk):
        hi = min(lo + chunk, ne)
        v, e, n = _polar_chunk(p, w, m, um1[lo:hi], eta[lo:hi], tol,
                               one_minus_cos, q, max_panels)
        out_v[lo:hi] = v
        out_e[lo:hi] = e
        nev += n
    return out_v, out_e, nev


def _polar_chunk(p, w, m, um1, eta, tol, omc, q, max_panels):
    ne = um1.size
    pa, pb, pr = [], [], []
    pvals, perrs = [], []
    nev = 0
    for region in (0, 1):
        a0 = np.array([0.0])
        b0 = np.array([1.0])
        v, e = _eval_panels(a0, b0, region, q, p, w, m, omc, um1, eta)
        pa.append(a0)
        pb.append(b0)
        pr.append(np.array([region]))
        pvals.append(v)
        perrs.append(e)
        nev += 15 * ne
    a = np.concatenate(pa)
    b = np.concatenate(pb)
    reg = np.concatenate(pr)
    vals = np.concatenate(pvals, axis=0)
    errs = np.concatenate(perrs, axis=0)

    while a.size < max_panels:
        tot = vals.sum(axis=0)
        err = errs.sum(axis=0)
        scale = np.maximum(np.abs(tot), 1e-300)
        live = err > tol * scale
        if not live.any():
            break
        # refine every panel holding more than its share of a live element's budget
        share = tol * scale[None, live] / (4.0 * a.size)
        split = (errs[:, live] > share).any(axis=1)
        if not split.any():
            split[np.argmax(errs[:, live].max(axis=1))] = True
        mid = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[split], mid])
        nb = np.concatenate([mid, b[split]])
        nreg = np.concatenate([reg[split], reg[split]])
        newv = np.empty((na.size, ne))
        newe = np.empty((na.size, ne))
        for region in (0, 1):
            sel = nreg == region
            if sel.any():
                vv, ee = _eval_panels(na[sel], nb[sel], region, q, p, w, m,
                                      omc, um1, eta)
                newv[sel] = vv
                newe[sel] = ee
                nev += 15 * sel.sum() * ne
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        reg = np.concatenate([reg[keep], nreg])
        vals = np.concatenate([vals[keep], newv], axis=0)
        errs = np.concatenate([errs[keep], newe], axis=0)

    return vals.sum(axis=0), errs.sum(axis=0), nev
