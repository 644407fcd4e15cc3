import math

def rasch_log_likelihood(thetas, difficulties, responses):
    total = 0.0
    for s, i, correct in responses:
        p = 1.0 / (1.0 + math.exp(-(thetas[s] - difficulties[i])))
        total += math.log(p if correct else 1 - p)
    return total
