def sample_from_factors(z, mean, loadings):
    out = list(mean)
    for zi, column in zip(z, loadings):
        for d, w in enumerate(column):
            out[d] += zi * w
    return out
