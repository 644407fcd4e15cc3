def reparameterize(mu, log_var, eps):
    pass


def kl_divergence(mu, log_var):
    pass
