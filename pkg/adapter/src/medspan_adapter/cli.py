"""medspan-adapter MODEL_REF DATASET OUT: tweet file in, prediction file out."""

from __future__ import annotations

import click

from .adapt import DatasetError, adapt
from .models import ModelError, load_model
from .tracks import OffsetError


@click.command()
@click.argument("model_ref")
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.argument("out", type=click.Path(dir_okay=False, writable=True))
@click.option("--batch-size", default=16, show_default=True, help="Inference batch size.")
def main(model_ref: str, dataset: str, out: str, batch_size: int) -> None:
    """Run MODEL_REF over the tweets in DATASET and write per-character
    probability tracks to OUT.

    MODEL_REF is stub:seed=N,rate=R for the deterministic test model or
    hf:NAME for a token-classification checkpoint.
    """
    try:
        model = load_model(model_ref, batch_size=batch_size)
        count = adapt(model, dataset, out)
    except (ModelError, DatasetError, OffsetError, ValueError) as error:
        raise click.ClickException(str(error)) from error
    click.echo(f"wrote {out} ({count} tweets)")


if __name__ == "__main__":
    main()
