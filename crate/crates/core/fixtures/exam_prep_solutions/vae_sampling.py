import math

def reparameterize(mu, log_var, eps):
    return [m + math.exp(lv / 2) * e for m, lv, e in zip(mu, log_var, eps)]


def kl_divergence(mu, log_var):
    return -0.5 * sum(1 + lv - m * m - math.exp(lv) for m, lv in zip(mu, log_var))
