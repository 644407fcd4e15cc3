def optimal_clusters(log_likelihoods, dim, n):
    pass
