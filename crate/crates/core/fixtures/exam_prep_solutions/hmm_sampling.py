import random

def sample_hmm(init, trans, emit, n, seed):
    rng = random.Random(seed)
    def draw(dist):
        u, acc = rng.random(), 0.0
        for i, p in enumerate(dist):
            acc += p
            if u < acc:
                return i
        return len(dist) - 1
    states, obs = [], []
    s = draw(init)
    for t in range(n):
        if t:
            s = draw(trans[s])
        states.append(s)
        obs.append(draw(emit[s]))
    return states, obs
