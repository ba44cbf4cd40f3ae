"""End-to-end alignment of two unpaired rotation sets.

The source set ``B`` is modelled as ``b = L.T @ a @ R`` for some target
``a``.  :func:`align_axis_consistent` assumes ``L = I``; :func:`align_pasi`
also searches the proper signed permutations.  Either way the result
satisfies ``A ~ L* @ B @ r_bar.T`` (see :func:`apply_alignment`).
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import AllHypothesesDegenerate, DegenerateMean, EmptySet
from .matchers import MatchResult, MatcherConfig, match, polar_azimuth_histogram
from .permutations import IDENTITY, SignedPermutation, apply_to_triple, enumerate_signed_permutations
from .rotation import RotationSet, as_matrices, mean_rotation, project_to_so3
from .tbv import apply_rotation, mean_direction, rotation_to_north, tbvs_from_so3

FUSIONS = ("mean_frame_procrustes", "projected_mean", "karcher")


@dataclass(frozen=True)
class AlignmentConfig:
    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    fusion: str = "mean_frame_procrustes"
    pasi: bool = False
    proper_only: bool = True
    procrustes_refine: bool = False
    threads: int = 0  # 0: read SO3_ALIGN_THREADS, default 1

    def __post_init__(self):
        if self.fusion not in FUSIONS:
            raise ValueError(f"fusion must be one of {FUSIONS}")


@dataclass
class GlobalAlignment:
    l_star: SignedPermutation
    r_bar: np.ndarray
    per_axis: tuple
    score: float
    hypothesis_scores: np.ndarray
    hypotheses: list
    converged: bool = True
    refined: bool = False


def _thread_count(cfg):
    if cfg.threads:
        return max(1, int(cfg.threads))
    try:
        return max(1, int(os.environ.get("SO3_ALIGN_THREADS", "1")))
    except ValueError:
        return 1


def _check_nonempty(targets, sources):
    a, b = as_matrices(targets), as_matrices(sources)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptySet("both rotation sets must be non-empty")
    return a, b


def fuse(results, method):
    """Combine three per-axis matches into one rotation.

    ``mean_frame_procrustes`` stacks the source centres ``c_i`` and their
    aligned images ``R_i c_i`` as rows and projects ``aligned^T @ source``
    onto SO(3); the other two average the per-axis rotations.
    """
    if method == "mean_frame_procrustes":
        src = np.stack([r.source_centre for r in results])
        aligned = np.stack([r.rotation @ r.source_centre for r in results])
        return project_to_so3(aligned.T @ src)
    rots = np.stack([r.rotation for r in results])
    if method == "projected_mean":
        return mean_rotation(rots, "projected_arithmetic")
    return mean_rotation(rots, "karcher")


def _result(l, results, cfg, scores, hyps):
    r_bar = fuse(results, cfg.fusion)
    return GlobalAlignment(
        l_star=l,
        r_bar=r_bar,
        per_axis=tuple(results),
        score=float(sum(r.score for r in results)),
        hypothesis_scores=np.asarray(scores, dtype=np.float64),
        hypotheses=list(hyps),
        converged=all(r.converged for r in results),
    )


def align_axis_consistent(targets, sources, cfg=None):
    """Match x-x, y-y and z-z TBV sets and fuse (``L = I``)."""
    cfg = cfg or AlignmentConfig()
    a, b = _check_nonempty(targets, sources)
    ta, tb = tbvs_from_so3(a), tbvs_from_so3(b)
    results = [match(ta[i], tb[i], cfg.matcher, axis="xyz"[i]) for i in range(3)]
    ga = _result(IDENTITY, results, cfg, [sum(r.score for r in results)], [IDENTITY])
    if cfg.procrustes_refine:
        ga = procrustes_refine(a, b, ga, cfg)
    return ga


def pasi_match_table(ta, tb, matcher_cfg, threads=1):
    """The 18 matches ``(i, j, s) -> MATCH(A_i, s * B_j)``.

    Entries whose matcher raised :class:`DegenerateMean` hold the exception.
    """
    keys = [(i, j, s) for i in range(3) for j in range(3) for s in (1, -1)]

    def run(key):
        i, j, s = key
        try:
            return match(ta[i], s * tb[j], matcher_cfg, axis=f"A{'xyz'[i]}/{'+' if s > 0 else '-'}B{'xyz'[j]}")
        except DegenerateMean as exc:
            return exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(run, keys))
    else:
        values = [run(k) for k in keys]
    return dict(zip(keys, values))


def hypothesis_score(table, l):
    """``S(L)``: summed scores of the three pairings ``L`` induces, or NaN."""
    total = 0.0
    for i in range(3):
        res = table[(i, l.perm[i], l.signs[i])]
        if not isinstance(res, MatchResult):
            return float("nan")
        total += res.score
    return total


def align_pasi(targets, sources, cfg=None, hypotheses=None):
    """Permutation-and-sign invariant alignment.

    Runs the 18 per-axis matches once, scores every hypothesis by table
    lookup and keeps the maximiser (first in canonical order on ties).
    """
    cfg = cfg or AlignmentConfig(pasi=True)
    a, b = _check_nonempty(targets, sources)
    ta, tb = tbvs_from_so3(a), tbvs_from_so3(b)
    hyps = hypotheses if hypotheses is not None else enumerate_signed_permutations(cfg.proper_only)
    table = pasi_match_table(ta, tb, cfg.matcher, _thread_count(cfg))
    scores = np.array([hypothesis_score(table, l) for l in hyps])
    if np.all(np.isnan(scores)):
        raise AllHypothesesDegenerate("every signed-permutation hypothesis hit a degenerate mean")
    best = int(np.nanargmax(scores))  # first maximum = canonical tie-break
    l_star = hyps[best]
    results = [table[(i, l_star.perm[i], l_star.signs[i])] for i in range(3)]
    ga = _result(l_star, results, cfg, scores, hyps)
    if cfg.procrustes_refine:
        ga = procrustes_refine(a, b, ga, cfg)
    return ga


def align(targets, sources, cfg=None):
    cfg = cfg or AlignmentConfig()
    return align_pasi(targets, sources, cfg) if cfg.pasi else align_axis_consistent(targets, sources, cfg)


def recompute_hypothesis(targets, sources, l, matcher_cfg):
    """Score one hypothesis from scratch with three fresh matches."""
    ta, tb = tbvs_from_so3(targets), tbvs_from_so3(sources)
    src = apply_to_triple(l, tb)
    return float(sum(match(ta[i], src[i], matcher_cfg).score for i in range(3)))


def apply_alignment(sources, ga):
    """Map every source ``b`` to ``L* @ b @ r_bar.T``."""
    b = as_matrices(sources)
    out = ga.l_star.matrix.astype(np.float64) @ b @ ga.r_bar.T
    ts = sources.timestamps if isinstance(sources, RotationSet) else None
    return RotationSet(out, ts)


# --------------------------------------------------------------------------
# refinement


def alignment_objective(targets, aligned_sources, matcher_cfg=None):
    """Overlap of target and aligned-source TBVs on a polar x azimuth grid.

    Per axis, both sets are expressed in the target's mean-to-north frame
    and binned on a ``polar_bins x bins`` grid; the objective is the sum over
    axes of the cell-wise product, i.e. the correlation at zero shift.
    Higher is better.
    """
    cfg = matcher_cfg or MatcherConfig()
    ta, tb = tbvs_from_so3(targets), tbvs_from_so3(aligned_sources)
    total = 0.0
    for i in range(3):
        r = rotation_to_north(mean_direction(ta[i], tol=cfg.mean_tol, axis="xyz"[i]))
        ha = polar_azimuth_histogram(apply_rotation(ta[i], r), "z", cfg.bins, cfg.polar_bins)
        hb = polar_azimuth_histogram(apply_rotation(tb[i], r), "z", cfg.bins, cfg.polar_bins)
        total += float(np.sum(ha * hb))
    return total


def procrustes_refine(targets, sources, ga, cfg=None, gate_deg=10.0):
    """One-shot Procrustes correction of ``r_bar`` from pseudo-pairs.

    Each aligned source is paired with its nearest target (chordal distance);
    pairs farther than ``gate_deg`` are dropped.  The update
    ``r_bar' = proj(sum_l a_l^T L b_l)`` is kept only if it does not lower
    :func:`alignment_objective`; otherwise ``ga`` is returned unchanged.
    """
    cfg = cfg or AlignmentConfig()
    a, b = _check_nonempty(targets, sources)
    lb = ga.l_star.matrix.astype(np.float64) @ b
    aligned = lb @ ga.r_bar.T
    tree = cKDTree(a.reshape(-1, 9))
    chord, idx = tree.query(aligned.reshape(-1, 9))
    # chordal distance ||A - B||_F = 2 sqrt(2) sin(theta / 2)
    keep = chord <= 2.0 * np.sqrt(2.0) * np.sin(np.deg2rad(gate_deg) / 2.0)
    if keep.sum() < 3:
        return ga
    acc = np.einsum("nji,njk->ik", a[idx[keep]], lb[keep])
    r_new = project_to_so3(acc)
    trial = GlobalAlignment(**{**ga.__dict__, "r_bar": r_new, "refined": True})
    before = alignment_objective(a, aligned, cfg.matcher)
    after = alignment_objective(a, lb @ r_new.T, cfg.matcher)
    return trial if after >= before else ga
