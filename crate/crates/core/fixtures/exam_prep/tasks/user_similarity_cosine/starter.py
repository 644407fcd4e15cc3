def cosine_similarity(a, b):
    pass
