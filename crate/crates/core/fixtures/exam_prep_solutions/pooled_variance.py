def pooled_variance(a, b):
    def ss(xs):
        m = sum(xs) / len(xs)
        return sum((x - m) ** 2 for x in xs)
    return (ss(a) + ss(b)) / (len(a) + len(b) - 2)
