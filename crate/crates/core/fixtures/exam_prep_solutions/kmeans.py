def kmeans_step(points, centroids):
    sums = [[0.0] * len(c) for c in centroids]
    counts = [0] * len(centroids)
    for p in points:
        dists = [sum((a - b) ** 2 for a, b in zip(p, c)) for c in centroids]
        j = dists.index(min(dists))
        counts[j] += 1
        for d, v in enumerate(p):
            sums[j][d] += v
    return [
        [s / counts[j] for s in sums[j]] if counts[j] else list(centroids[j])
        for j in range(len(centroids))
    ]
