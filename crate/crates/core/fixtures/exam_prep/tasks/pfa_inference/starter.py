def pfa_probability(params, counts):
    pass
