"""Figures for the CLI reports, rendered to files without a display."""

from __future__ import annotations

from collections import defaultdict

from matplotlib.figure import Figure


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    return path


def plot_profile(rows, path):
    """H_k/w in percent against k, one line per document."""
    by_doc = defaultdict(list)
    for r in rows:
        by_doc[r.document].append((r.k, r.quotient_pct))
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    for doc, pts in by_doc.items():
        pts.sort()
        ax.plot([k for k, _ in pts], [q for _, q in pts], marker="o", label=doc or "(stdin)")
    ax.set_xlabel("k")
    ax.set_ylabel("H_k / w  [%]")
    ax.set_xscale("log", base=2)
    if len(by_doc) <= 12:
        ax.legend(fontsize="small")
    return _save(fig, path)


def plot_sn_table(rows, path):
    """H_k(S_n) next to the lower bound 2^(n-k), log scale."""
    by_n = defaultdict(list)
    for r in rows:
        by_n[r.n].append(r)
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    for n in sorted(by_n):
        pts = sorted(by_n[n], key=lambda r: r.k)
        line, = ax.plot([r.k for r in pts], [r.hk_bits for r in pts], marker=".", label=f"n={n}")
        ax.plot([r.k for r in pts], [r.bound for r in pts], ls=":", color=line.get_color())
    ax.set_yscale("log")
    ax.set_xlabel("k")
    ax.set_ylabel("bits (solid: H_k(S_n), dotted: 2^(n-k))")
    if len(by_n) <= 8:
        ax.legend(fontsize="small")
    return _save(fig, path)


def plot_measure(records, path):
    """Code length |B(G)| against H_k(t) for each measured tree and k."""
    fig = Figure(figsize=(5, 5))
    ax = fig.add_subplot()
    ks = sorted({k for _, m in records for k in m.hk})
    hi = 1.0
    for k in ks:
        xs = [m.hk[k] for _, m in records if k in m.hk]
        ys = [m.code_bits for _, m in records if k in m.hk]
        ax.scatter(xs, ys, s=12, label=f"k={k}")
        hi = max([hi, *xs, *ys])
    ax.plot([0, hi], [0, hi], color="grey", lw=0.8)
    ax.set_xlabel("H_k(t) [bits]")
    ax.set_ylabel("|B(G_t)| [bits]")
    ax.legend(fontsize="small")
    return _save(fig, path)
