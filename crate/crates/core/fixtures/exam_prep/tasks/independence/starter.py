def are_independent(joint, tol=1e-9):
    pass
