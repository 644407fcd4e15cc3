def posterior(prior, sensitivity, false_positive_rate):
    hit = prior * sensitivity
    return hit / (hit + (1 - prior) * false_positive_rate)
