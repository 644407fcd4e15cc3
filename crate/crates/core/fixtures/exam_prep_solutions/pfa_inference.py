import math

def pfa_probability(params, counts):
    z = sum(b + g * s + r * f for (b, g, r), (s, f) in zip(params, counts))
    return 1.0 / (1.0 + math.exp(-z))
