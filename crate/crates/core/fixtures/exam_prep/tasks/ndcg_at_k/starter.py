def ndcg_at_k(relevances, k):
    pass
