import math

def optimal_clusters(log_likelihoods, dim, n):
    def bic(k):
        p = k * (dim + dim * (dim + 1) / 2) + (k - 1)
        return p * math.log(n) - 2 * log_likelihoods[k]
    return min(sorted(log_likelihoods), key=bic)
