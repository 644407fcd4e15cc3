def prob_sum(n_dice, target):
    pass
