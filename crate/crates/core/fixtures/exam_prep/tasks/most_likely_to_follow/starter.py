def most_likely_next(transitions, state):
    pass
