def pooled_variance(a, b):
    pass
