def kmeans_step(points, centroids):
    pass
