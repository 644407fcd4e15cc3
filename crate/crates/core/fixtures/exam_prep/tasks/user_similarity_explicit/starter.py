def rating_similarity(a, b):
    pass
