def prob_sum(n_dice, target):
    ways = {0: 1}
    for _ in range(n_dice):
        nxt = {}
        for s, w in ways.items():
            for face in range(1, 7):
                nxt[s + face] = nxt.get(s + face, 0) + w
        ways = nxt
    return ways.get(target, 0) / 6 ** n_dice
