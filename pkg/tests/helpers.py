"""Independent reference implementations used as test oracles.

Everything here is written forward from first principles, loop by loop,
without importing logic from the package under test. Slow on purpose.
"""

from __future__ import annotations

import math

import numpy as np


# ---------------------------------------------------------- numeric grads

def numeric_gradient(loss_fn, params, name, h=1e-4, indices=None):
    """Central finite differences on one named tensor of a ModelParams."""
    tensor = params[name]
    flat = tensor.reshape(-1) if tensor.ndim else tensor.reshape(1)
    if indices is None:
        indices = range(flat.size)
    out = {}
    for i in indices:
        orig = flat[i]
        flat[i] = orig + h
        up = loss_fn()
        flat[i] = orig - h
        down = loss_fn()
        flat[i] = orig
        out[i] = (up - down) / (2.0 * h)
    return out


def relative_error(analytic: float, numeric: float, floor: float = 1e-8) -> float:
    denom = max(abs(analytic), abs(numeric), floor)
    if analytic == 0.0 and abs(numeric) < 1e-10:
        return 0.0
    return abs(analytic - numeric) / denom


# ------------------------------------------------- reference transformer

def _ref_layer_norm(vec, gain, offset, eps=1e-12):
    mean = sum(vec) / len(vec)
    var = sum((x - mean) ** 2 for x in vec) / len(vec)
    inv = 1.0 / math.sqrt(var + eps)
    return [gain[j] * (vec[j] - mean) * inv + offset[j] for j in range(len(vec))]


def _ref_gelu(x):
    return 0.5 * x * (1.0 + math.erf(x / math.sqrt(2.0)))


def _ref_softmax(scores):
    mx = max(scores)
    exps = [math.exp(s - mx) for s in scores]
    total = sum(exps)
    return [e / total for e in exps]


def reference_logit(params, ids, mask):
    """Scalar-arithmetic re-implementation of the encoder forward pass.

    Takes one sequence (lists of ints/floats), returns the [CLS] logit.
    Mirrors the documented architecture: embeddings + layer norm,
    post-norm attention and feed-forward blocks, single-logit head.
    """
    cfg = params.config
    h_dim = cfg.hidden_dim
    seq = len(ids)
    tok = params["tok_emb"]
    pos = params["pos_emb"]

    x = [[float(tok[ids[t]][j]) + float(pos[t][j]) for j in range(h_dim)]
         for t in range(seq)]
    g = params["emb_ln_g"]
    b = params["emb_ln_b"]
    x = [_ref_layer_norm(row, g, b) for row in x]

    head_dim = h_dim // cfg.num_heads
    scale = 1.0 / math.sqrt(head_dim)
    for layer in range(cfg.num_layers):
        pre = f"layers.{layer}."
        wq, bq = params[pre + "wq"], params[pre + "bq"]
        wk, bk = params[pre + "wk"], params[pre + "bk"]
        wv, bv = params[pre + "wv"], params[pre + "bv"]
        wo, bo = params[pre + "wo"], params[pre + "bo"]

        def proj(row, w, bias):
            return [sum(row[i] * float(w[i][j]) for i in range(h_dim)) + float(bias[j])
                    for j in range(h_dim)]

        q = [proj(row, wq, bq) for row in x]
        k = [proj(row, wk, bk) for row in x]
        v = [proj(row, wv, bv) for row in x]

        ctx = [[0.0] * h_dim for _ in range(seq)]
        for head in range(cfg.num_heads):
            lo = head * head_dim
            for t in range(seq):
                scores = []
                for s in range(seq):
                    dot = sum(q[t][lo + d] * k[s][lo + d] for d in range(head_dim))
                    dot *= scale
                    if mask[s] <= 0:
                        dot += -1e30
                    scores.append(dot)
                probs = _ref_softmax(scores)
                for d in range(head_dim):
                    ctx[t][lo + d] = sum(probs[s] * v[s][lo + d] for s in range(seq))

        attn = [proj(row, wo, bo) for row in ctx]
        x = [[x[t][j] + attn[t][j] for j in range(h_dim)] for t in range(seq)]
        x = [_ref_layer_norm(row, params[pre + "ln1_g"], params[pre + "ln1_b"]) for row in x]

        w1, b1 = params[pre + "w1"], params[pre + "b1"]
        w2, b2 = params[pre + "w2"], params[pre + "b2"]
        ffn = []
        for row in x:
            hidden = [_ref_gelu(sum(row[i] * float(w1[i][j]) for i in range(h_dim)) + float(b1[j]))
                      for j in range(cfg.ffn_dim)]
            ffn.append([sum(hidden[i] * float(w2[i][j]) for i in range(cfg.ffn_dim)) + float(b2[j])
                        for j in range(h_dim)])
        x = [[x[t][j] + ffn[t][j] for j in range(h_dim)] for t in range(seq)]
        x = [_ref_layer_norm(row, params[pre + "ln2_g"], params[pre + "ln2_b"]) for row in x]

    head_w = params["head_w"]
    return sum(x[0][j] * float(head_w[j]) for j in range(h_dim)) + float(params["head_b"])


# ------------------------------------------------------- metrics recount

def brute_force_confusion(labels, scores, threshold):
    tp = fp = tn = fn = 0
    for y, s in zip(labels, scores):
        predicted = 1 if s >= threshold else 0
        if predicted == 1 and y == 1:
            tp += 1
        elif predicted == 1 and y == 0:
            fp += 1
        elif predicted == 0 and y == 0:
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn


# --------------------------------------------------- partition machinery

def set_partitions(items):
    """Every partition of a list, as lists of blocks (Bell-number many)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partial in set_partitions(rest):
        for i in range(len(partial)):
            yield partial[:i] + [[first] + partial[i]] + partial[i + 1:]
        yield [[first]] + partial


def blocks_to_assignments(n, blocks):
    comm = [0] * n
    for cid, block in enumerate(blocks):
        for node in block:
            comm[node] = cid
    return comm


# -------------------------------------- definition-form graph objectives

def naive_modularity(n, edges, loops, assignments):
    """Q from the definition, via an explicit adjacency matrix.

    edges: (u, v, w) with u != v; loops: {node: w}, a loop contributing
    2w on the diagonal.
    """
    a = np.zeros((n, n))
    for u, v, w in edges:
        a[u][v] += w
        a[v][u] += w
    for u, w in (loops or {}).items():
        a[u][u] += 2.0 * w
    two_m = a.sum()
    strength = a.sum(axis=1)
    q = 0.0
    for i in range(n):
        for j in range(n):
            if assignments[i] == assignments[j]:
                q += a[i][j] / two_m - (strength[i] * strength[j]) / (two_m * two_m)
    return q


def naive_map_equation(n, edges, loops, assignments):
    """Two-level description length in bits, straight from the formula."""
    a = np.zeros((n, n))
    for u, v, w in edges:
        a[u][v] += w
        a[v][u] += w
    for u, w in (loops or {}).items():
        a[u][u] += 2.0 * w
    two_m = a.sum()
    p = a.sum(axis=1) / two_m

    modules = sorted(set(assignments))
    q = {}
    p_mod = {}
    for c in modules:
        members = [i for i in range(n) if assignments[i] == c]
        exit_w = sum(a[i][j] for i in members for j in range(n) if assignments[j] != c)
        q[c] = exit_w / two_m
        p_mod[c] = sum(p[i] for i in members)

    def entropy(values):
        return -sum(x * math.log2(x) for x in values if x > 0)

    q_total = sum(q.values())
    cost = 0.0
    if q_total > 0:
        cost += q_total * entropy([q[c] / q_total for c in modules])
    for c in modules:
        denom = q[c] + p_mod[c]
        if denom <= 0:
            continue
        members = [i for i in range(n) if assignments[i] == c]
        cost += denom * entropy([q[c] / denom] + [p[i] / denom for i in members])
    return cost
