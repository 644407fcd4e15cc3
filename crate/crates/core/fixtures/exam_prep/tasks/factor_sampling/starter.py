def sample_from_factors(z, mean, loadings):
    pass
