def train_linear(xs, ys, lr, epochs):
    pass
