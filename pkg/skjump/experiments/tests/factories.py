from experiments.config import validate_config_data

LINEAR = {'name': 'linear_jump_ou', 'a': 1.0, 's': 0.5, 'gamma': 0.3,
          'lam': 2.0, 'x0': 0.0, 'y0': 1.0}


def config_data(experiment='strong_rate', model=None, assumptions=None,
                **run):
    """A nested config mapping as parse_config_text would produce it."""
    data = {'experiment': experiment, 'model': dict(model or LINEAR),
            'run': run}
    if assumptions is not None:
        data['assumptions'] = assumptions
    return data


def make_config(experiment='strong_rate', model=None, assumptions=None,
                **run):
    return validate_config_data(
        config_data(experiment, model, assumptions, **run))


STRONG_TEXT = """\
# strong error on the linear jump OU model
experiment = strong_rate

model.name = linear_jump_ou
model.a = 1
model.s = 0.5
model.gamma = 0.3
model.lam = 2
model.y0 = 1

run.T = 1
run.n_steps = 50
run.epsilons = 0.0625, 0.25, 0.125
run.n_paths = 20
run.seed = 11
"""
