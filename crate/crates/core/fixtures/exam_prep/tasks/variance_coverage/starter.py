def components_needed(eigenvalues, coverage):
    pass
