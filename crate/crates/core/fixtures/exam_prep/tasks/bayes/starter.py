def posterior(prior, sensitivity, false_positive_rate):
    pass
