"""vlm-export: turn one checkpoint + one image dataset into a bundle."""

from __future__ import annotations

import argparse
import logging
import sys

from .backends import BackendError, make_backend
from .job import JobError, load_job
from .runner import ExportError, export, validate_with_engine


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlm-export",
        description="Extract visual/textual embeddings into a scoring bundle.",
    )
    parser.add_argument("--job", required=True, help="job JSON file")
    parser.add_argument(
        "--backend", default=None, help="override the job's encoder backend"
    )
    parser.add_argument(
        "--no-validate",
        action="store_true",
        help="skip running the scoring engine's validator on the result",
    )
    parser.add_argument(
        "--validate-cmd",
        default="vega validate",
        help="validator command (default: 'vega validate')",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        job = load_job(args.job)
        backend = make_backend(args.backend or job.backend, job.model)
        summary = export(job, backend)
        if not args.no_validate:
            validate_with_engine(job.output, args.validate_cmd)
            summary["validated"] = True
        print(
            "exported {images} images ({skipped} skipped), {classes} classes, "
            "{templates} templates, D={dim} -> {output}".format(**summary)
        )
        return 0
    except (JobError, BackendError, ExportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
