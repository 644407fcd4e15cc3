def train_linear(xs, ys, lr, epochs):
    w = b = 0.0
    n = len(xs)
    for _ in range(epochs):
        gw = sum(2 * (w * x + b - y) * x for x, y in zip(xs, ys)) / n
        gb = sum(2 * (w * x + b - y) for x, y in zip(xs, ys)) / n
        w -= lr * gw
        b -= lr * gb
    return w, b
