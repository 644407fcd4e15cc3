def are_independent(joint, tol=1e-9):
    pa, pb = {}, {}
    for (a, b), p in joint.items():
        pa[a] = pa.get(a, 0.0) + p
        pb[b] = pb.get(b, 0.0) + p
    return all(abs(p - pa[a] * pb[b]) <= tol for (a, b), p in joint.items())
