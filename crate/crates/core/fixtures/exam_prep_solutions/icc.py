import math

def icc(theta, a, b):
    return 1.0 / (1.0 + math.exp(-a * (theta - b)))
