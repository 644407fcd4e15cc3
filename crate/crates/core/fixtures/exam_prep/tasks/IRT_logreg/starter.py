def rasch_log_likelihood(thetas, difficulties, responses):
    pass
