def signed_rank_statistic(x, y):
    pass
