import random

def sample_hmm(init, trans, emit, n, seed):
    pass
