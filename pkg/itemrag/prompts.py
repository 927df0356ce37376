"""Versioned prompt templates.

Templates are bit-exact: any wording change must bump the version string,
which feeds the summary config hash and so invalidates cached summaries.
"""

import re
from typing import Dict, List, Sequence

SUMMARY_TEMPLATE_VERSION = "v1"
RANKING_TEMPLATE_VERSION = "v1"

SUMMARY_TEMPLATES: Dict[str, str] = {
    "v1": (
        'The following products are frequently purchased together with the product "{query_title}".\n'
        "Co-purchased products:\n"
        "{item_lines}\n"
        'Summarize, in at most 80 words, what kinds of products are commonly bought together with "{query_title}" and why.'
    ),
}

RANKING_HEADER = (
    "You are a recommender system. A user purchased the following products in chronological order:"
)
RANKING_INSTRUCTION = (
    "Rank ALL of the following {count} candidate products from most to least likely "
    "to be the user's next purchase."
)
RANKING_ANSWER_FORMAT = (
    'Answer with only the labels in ranked order, comma-separated '
    '(e.g., "B, A, D, C, E, F, G, H, I, J").'
)

CANDIDATE_LINE = re.compile(r"^([A-Z])\) (.*)$", re.MULTILINE)
SUMMARY_ITEM_LINE = re.compile(r"^- (.*)$", re.MULTILINE)


def render_summary_prompt(
    query_title: str, titles: Sequence[str], version: str = SUMMARY_TEMPLATE_VERSION
) -> str:
    template = SUMMARY_TEMPLATES[version]
    item_lines = "\n".join(f"- {title}" for title in titles)
    return template.format(query_title=query_title, item_lines=item_lines)


def render_ranking_prompt(history: Sequence[str], candidates: Sequence[str], labels: str) -> str:
    lines: List[str] = [RANKING_HEADER]
    lines.extend(f"{index}. {text}" for index, text in enumerate(history, start=1))
    lines.append(RANKING_INSTRUCTION.format(count=len(candidates)))
    lines.extend(f"{labels[i]}) {text}" for i, text in enumerate(candidates))
    lines.append(RANKING_ANSWER_FORMAT)
    return "\n".join(lines)


def is_ranking_prompt(text: str) -> bool:
    return text.startswith(RANKING_HEADER)


def is_summary_prompt(text: str) -> bool:
    return "Co-purchased products:\n" in text and not is_ranking_prompt(text)
