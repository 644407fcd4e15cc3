def ward_distance(a, b):
    def mean(c):
        return [sum(p[d] for p in c) / len(c) for d in range(len(c[0]))]
    ma, mb = mean(a), mean(b)
    sq = sum((x - y) ** 2 for x, y in zip(ma, mb))
    return len(a) * len(b) / (len(a) + len(b)) * sq
