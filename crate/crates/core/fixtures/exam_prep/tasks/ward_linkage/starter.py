def ward_distance(a, b):
    pass
