def one_hot_interaction(skill, correct, n_skills):
    v = [0] * (2 * n_skills)
    v[skill + n_skills * int(bool(correct))] = 1
    return v
