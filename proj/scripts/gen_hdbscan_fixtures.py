#!/usr/bin/env python3
"""Regenerates tests/fixtures/hdbscan/fixture*.json.

Each fixture stores a point set, HDBSCAN parameters, and the expected
labels. Labels come from a NumPy mirror of the C++ implementation (same
Prim bookkeeping, edge ordering, condensing, EOM selection, and ascending
renumbering) and are only stored when scikit-learn's HDBSCAN produces the
identical labelling, so the files double as an independent cross-check.
Seeds where the two disagree (possible at exact distance ties) are skipped.

Usage: python3 scripts/gen_hdbscan_fixtures.py
"""
import json
import pathlib

import numpy as np
from sklearn.cluster import HDBSCAN

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "hdbscan"
FIXTURES = 10
MAX_POINTS = 300


def mirror_hdbscan(X, min_cluster_size, min_samples):
    n = len(X)
    if n < min_cluster_size or min_samples > n:
        return np.full(n, -1)
    D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
    core = np.sort(D, axis=1)[:, min_samples - 1]
    W = np.maximum(np.maximum(core[:, None], core[None, :]), D)

    # Prim over mutual reachability; each edge stores the expanded node and
    # the argmin-first new node, matching the C++ exactly.
    current_labels = np.arange(n)
    min_reach = np.full(n, np.inf)
    edges = []
    current = 0
    for _ in range(n - 1):
        keep = current_labels != current
        current_labels = current_labels[keep]
        min_reach = np.minimum(min_reach[keep], W[current][current_labels])
        k = int(np.argmin(min_reach))
        new = int(current_labels[k])
        edges.append((current, new, float(min_reach[k])))
        current = new
    edges.sort(key=lambda e: (e[2], e[0], e[1]))

    parent = list(range(2 * n - 1))
    size = [1] * n + [0] * (n - 1)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    nodes = []
    nid = n
    for a, b, d in edges:
        ra, rb = find(a), find(b)
        nodes.append((ra, rb, d, size[ra] + size[rb]))
        parent[ra] = parent[rb] = nid
        size[nid] = size[ra] + size[rb]
        nid += 1

    mcs = min_cluster_size
    root = 2 * n - 2
    relabel = {root: n}
    next_label = n + 1
    rows = []

    def bfs(v):
        out, q = [], [v]
        while q:
            out.extend(q)
            q = [x for x in q if x >= n]
            q = [c for x in q for c in nodes[x - n][:2]]
        return out

    ignore = set()
    for node in bfs(root):
        if node in ignore or node < n:
            continue
        left, right, d, _ = nodes[node - n]
        lam = np.inf if d <= 0.0 else 1.0 / d
        sl = 1 if left < n else nodes[left - n][3]
        sr = 1 if right < n else nodes[right - n][3]
        cl = relabel[node]
        if sl >= mcs and sr >= mcs:
            relabel[left] = next_label
            rows.append((cl, next_label, lam, sl))
            next_label += 1
            relabel[right] = next_label
            rows.append((cl, next_label, lam, sr))
            next_label += 1
        else:
            drop = []
            if sl < mcs:
                drop.append(left)
            else:
                relabel[left] = cl
            if sr < mcs:
                drop.append(right)
            else:
                relabel[right] = cl
            for top in drop:
                for sub in bfs(top):
                    if sub < n:
                        rows.append((cl, sub, lam, 1))
                    ignore.add(sub)

    births = {}
    for _, c, lam, _ in rows:
        births[c] = min(lam, births.get(c, np.inf))
    births[n] = 0.0
    stab = {c: 0.0 for c in range(n, next_label)}
    for p, _, lam, s in rows:
        stab[p] += (lam - births[p]) * s

    children = {}
    for p, c, _, s in rows:
        if s > 1:
            children.setdefault(p, []).append(c)
    node_list = sorted(stab.keys(), reverse=True)[:-1]
    is_cluster = {c: True for c in node_list}
    for node in node_list:
        sub = sum(stab[ch] for ch in children.get(node, []))
        if sub > stab[node]:
            is_cluster[node] = False
            stab[node] = sub
        else:
            q = list(children.get(node, []))
            while q:
                x = q.pop()
                is_cluster[x] = False
                q.extend(children.get(x, []))
    selected = {c for c, v in is_cluster.items() if v}

    parent_of = {c: p for p, c, _, s in rows if s > 1}
    labels = np.full(n, -1)

    def selected_ancestor(c):
        while c is not None and c not in selected:
            c = parent_of.get(c)
        return c

    for p, c, _, s in rows:
        if s == 1 and c < n:
            a = selected_ancestor(p)
            if a is not None:
                labels[c] = a
    uniq = sorted(set(labels[labels >= 0]))
    remap = {u: i for i, u in enumerate(uniq)}
    return np.array([remap.get(x, -1) for x in labels])


def make_dataset(rng, shape_index):
    dims = [2, 2, 3, 2, 5, 2, 3, 2, 2, 4][shape_index % 10]
    k = [2, 3, 1, 4, 2, 3, 2, 1, 4, 3][shape_index % 10]
    parts = []
    for _ in range(k):
        center = rng.uniform(-12, 12, size=dims)
        count = int(rng.integers(8, 45))
        scale = rng.uniform(0.15, 0.8)
        parts.append(center + rng.normal(scale=scale, size=(count, dims)))
    noise = int(rng.integers(0, 20))
    if noise:
        parts.append(rng.uniform(-18, 18, size=(noise, dims)))
    X = np.vstack(parts)[:MAX_POINTS]
    rng.shuffle(X)
    mcs = int(rng.integers(4, 12))
    ms = int(rng.integers(2, mcs + 1))
    return X, mcs, ms


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    written = 0
    seed = 0
    while written < FIXTURES and seed < 500:
        rng = np.random.default_rng(1000 + seed)
        X, mcs, ms = make_dataset(rng, seed)
        seed += 1
        if len(X) <= ms:
            continue
        ours = mirror_hdbscan(X, mcs, ms)
        theirs = HDBSCAN(min_cluster_size=mcs, min_samples=ms).fit(X).labels_
        if not np.array_equal(ours, theirs):
            print(f"seed {seed - 1}: disagreement, skipped")
            continue
        clusters = len(set(ours[ours >= 0]))
        path = OUT_DIR / f"fixture{written:02d}.json"
        with open(path, "w") as f:
            json.dump(
                {
                    "seed": 1000 + seed - 1,
                    "min_cluster_size": mcs,
                    "min_samples": ms,
                    "points": [[float(v) for v in row] for row in X],
                    "labels": [int(v) for v in ours],
                },
                f,
            )
            f.write("\n")
        noise = int((ours < 0).sum())
        print(f"{path.name}: n={len(X)} dims={X.shape[1]} mcs={mcs} ms={ms} "
              f"clusters={clusters} noise={noise}")
        written += 1
    if written < FIXTURES:
        raise SystemExit(f"only {written} fixtures written")


if __name__ == "__main__":
    main()
