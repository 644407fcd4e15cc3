import math

def first_component(points):
    n = len(points)
    mx = sum(p[0] for p in points) / n
    my = sum(p[1] for p in points) / n
    a = sum((p[0] - mx) ** 2 for p in points) / (n - 1)
    c = sum((p[1] - my) ** 2 for p in points) / (n - 1)
    b = sum((p[0] - mx) * (p[1] - my) for p in points) / (n - 1)
    lam = (a + c) / 2 + math.sqrt(((a - c) / 2) ** 2 + b * b)
    if abs(b) > 1e-15:
        v = (lam - c, b)
    elif a >= c:
        v = (1.0, 0.0)
    else:
        v = (0.0, 1.0)
    norm = math.hypot(*v)
    x, y = v[0] / norm, v[1] / norm
    if x < 0 or (x == 0 and y < 0):
        x, y = -x, -y
    return (x, y)
