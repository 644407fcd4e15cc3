def most_likely_next(transitions, state):
    row = transitions[state]
    return min(row, key=lambda s: (-row[s], s))
