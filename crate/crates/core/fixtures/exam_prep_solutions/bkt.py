def bkt_update(p_mastery, p_transit, p_slip, p_guess, correct):
    if correct:
        known = p_mastery * (1 - p_slip)
        unknown = (1 - p_mastery) * p_guess
    else:
        known = p_mastery * p_slip
        unknown = (1 - p_mastery) * (1 - p_guess)
    post = known / (known + unknown)
    return post + (1 - post) * p_transit
