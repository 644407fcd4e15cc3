def one_hot_interaction(skill, correct, n_skills):
    pass
