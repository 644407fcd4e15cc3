def bkt_update(p_mastery, p_transit, p_slip, p_guess, correct):
    pass
