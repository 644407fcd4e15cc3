def first_component(points):
    pass
