def icc(theta, a, b):
    pass
