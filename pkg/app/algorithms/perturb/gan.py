"""GAN-generated borderline points and their injection into a series copy."""

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.preprocessing import MinMaxScaler

from app.algorithms.perturb.injection import InjectionResult, inject, injection_count
from app.algorithms.perturb.mlp import (
    Adam,
    Gradients,
    Mlp,
    bce,
    bce_gradient,
    discriminator,
    generator,
)
from app.core.exceptions import InsufficientDataError, InvalidParameterError
from app.models.config import GanConfig
from app.models.report import GanEpoch
from app.models.series import TimeSeries

logger = logging.getLogger(__name__)

HELDOUT_FRACTION = 0.1
MIN_ROWS = 4


@dataclass
class TrainedGan:
    generator: Mlp
    discriminator: Mlp
    history: list[GanEpoch]


def _sum_gradients(first: Gradients, second: Gradients) -> Gradients:
    return Gradients(
        [a + b for a, b in zip(first.weights, second.weights, strict=True)],
        [a + b for a, b in zip(first.bias, second.bias, strict=True)],
        first.inputs,
    )


def _heldout_loss(gen: Mlp, disc: Mlp, real: np.ndarray, noise: np.ndarray) -> float:
    real_scores = disc.predict(real)
    fake_scores = disc.predict(gen.predict(noise))
    return 0.5 * (bce(real_scores, 1.0) + bce(fake_scores, 0.0))


def train_gan(data: np.ndarray, config: GanConfig, rng: np.random.Generator) -> TrainedGan:
    """Train G and D on rows already scaled to [-1, 1].

    A tenth of the rows plus a fixed noise batch are held out; the history
    records the discriminator's plain BCE on them after every epoch.
    """
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    n, d = data.shape
    if config.epochs < 1:
        raise InvalidParameterError("GAN training needs at least one epoch")
    if n < MIN_ROWS:
        raise InsufficientDataError(f"GAN training needs at least {MIN_ROWS} rows, got {n}")
    batch_size = min(config.batch_size, n // 2)
    if batch_size < config.batch_size:
        logger.warning("GAN batch size %d clamped to %d for %d rows", config.batch_size, batch_size, n)

    order = rng.permutation(n)
    held = max(1, int(n * HELDOUT_FRACTION))
    heldout_real, train = data[order[:held]], data[order[held:]]
    heldout_noise = rng.standard_normal((held, config.noise_dim))

    gen = generator(config.noise_dim, config.hidden, d, rng, dropout=config.dropout)
    disc = discriminator(d, config.hidden, rng, dropout=config.dropout)
    gen_opt = Adam(config.learning_rate, config.beta1, config.beta2)
    disc_opt = Adam(config.learning_rate, config.beta1, config.beta2)

    history: list[GanEpoch] = []
    batches = max(1, int(np.ceil(train.shape[0] / batch_size)))
    for epoch in range(1, config.epochs + 1):
        d_losses, g_losses = [], []
        for rows in np.array_split(rng.permutation(train.shape[0]), batches):
            real = train[rows] + rng.normal(0.0, config.input_noise, size=(rows.size, d))
            fake = gen.predict(rng.standard_normal((rows.size, config.noise_dim)))
            fake = fake + rng.normal(0.0, config.input_noise, size=fake.shape)

            real_scores, real_cache = disc.forward(real, training=True, rng=rng)
            fake_scores, fake_cache = disc.forward(fake, training=True, rng=rng)
            assert real_cache is not None and fake_cache is not None
            grads = _sum_gradients(
                disc.backward(real_cache, 0.5 * bce_gradient(real_scores, config.real_label)),
                disc.backward(fake_cache, 0.5 * bce_gradient(fake_scores, config.fake_label)),
            )
            disc_opt.step(disc, grads)
            d_losses.append(0.5 * (bce(real_scores, config.real_label) + bce(fake_scores, config.fake_label)))

            noise = rng.standard_normal((rows.size, config.noise_dim))
            generated, gen_cache = gen.forward(noise, training=True, rng=rng)
            scores, disc_cache = disc.forward(generated, training=True, rng=rng)
            assert gen_cache is not None and disc_cache is not None
            through_disc = disc.backward(disc_cache, bce_gradient(scores, config.real_label))
            gen_opt.step(gen, gen.backward(gen_cache, through_disc.inputs))
            g_losses.append(bce(scores, config.real_label))

        history.append(
            GanEpoch(
                epoch=epoch,
                d_loss=float(np.mean(d_losses)),
                g_loss=float(np.mean(g_losses)),
                heldout_d_loss=_heldout_loss(gen, disc, heldout_real, heldout_noise),
            )
        )
    logger.info(
        "GAN trained for %d epochs: d_loss=%.4f g_loss=%.4f",
        config.epochs,
        history[-1].d_loss,
        history[-1].g_loss,
    )
    return TrainedGan(gen, disc, history)


def ambiguity(disc: Mlp, points: np.ndarray, tau: float) -> np.ndarray:
    """|D(x) - tau| per point, D in inference mode."""
    return np.abs(disc.predict(points).reshape(-1) - tau)


def borderline_indices(deltas: np.ndarray, budget: int) -> np.ndarray:
    deltas = np.asarray(deltas, dtype=np.float64).reshape(-1)
    if budget > deltas.size:
        raise InvalidParameterError(f"Cannot pick {budget} of {deltas.size} candidates")
    return np.sort(np.argsort(deltas, kind="stable")[:budget])


def select_borderline(
    candidates: np.ndarray, disc: Mlp, tau: float, budget: int
) -> tuple[np.ndarray, np.ndarray]:
    """The ``budget`` candidates closest to the decision boundary, ties to lower index."""
    chosen = borderline_indices(ambiguity(disc, candidates, tau), budget)
    return chosen, candidates[chosen]


def surrogate_label(disc: Mlp, points: np.ndarray, tau: float) -> np.ndarray:
    return (disc.predict(points).reshape(-1) >= tau).astype(np.int8)


@dataclass(frozen=True)
class GanInjection:
    injection: InjectionResult
    history: list[GanEpoch]
    candidates: np.ndarray


def gan_augment(series: TimeSeries, config: GanConfig, rng: np.random.Generator) -> GanInjection:
    """Train on the clean rows, then interleave ceil(budget * T) borderline points."""
    scaler = MinMaxScaler(feature_range=(-1, 1))
    scaled = scaler.fit_transform(series.values)
    trained = train_gan(scaled, config, rng)

    budget = injection_count(series.length, config.budget)
    candidates = trained.generator.predict(
        rng.standard_normal((config.pool_factor * budget, config.noise_dim))
    )
    _, chosen = select_borderline(candidates, trained.discriminator, config.tau, budget)
    labels = surrogate_label(trained.discriminator, chosen, config.tau)
    points = scaler.inverse_transform(chosen)
    logger.debug("GAN injection: %d points, %d labeled anomalous", budget, int(labels.sum()))
    return GanInjection(inject(series, points, labels), trained.history, candidates)
