"""Walk through the rule-based sentence segmenter.

Shows the boundary rules (terminal punctuation, abbreviations, lowercase
continuations, paragraph breaks), the byte spans each sentence gets, and
the well-formedness filter used when selecting machine sentences.
"""

from mgtloc import SegmenterConfig, segment, well_formed

SAMPLES = [
    "A cat sat. It slept.",
    "Dr. Smith arrived at 3.5 p.m. sharp. He spoke briefly.",
    "Wait... he paused. Then he continued!",
    'She said "Stop." Then she left.',
    "First paragraph line one.\n\nSecond paragraph starts fresh",
]

for text in SAMPLES:
    print(f"input: {text!r}")
    for s in segment(text):
        print(f"  [{s.start:3d},{s.end:3d}) tokens={s.tokens:2d}  {s.text!r}")
    print()

print("well-formedness (uppercase/digit/quote start, terminal punctuation, >= 3 tokens):")
for text in [
    "The market fell sharply today.",
    "and then some",
    "Why?",
    "Numbers like 2024 work fine.",
    '"Quoted openings count too."',
]:
    (s,) = segment(text)
    print(f"  {str(well_formed(s)):5s}  {s.text!r}")

print("\ncustom abbreviation lists change boundary decisions:")
text = "See fig. 3 for details. Next section follows."
default = [s.text for s in segment(text)]
custom = [s.text for s in segment(text, SegmenterConfig(abbreviation_list=frozenset({"fig"})))]
print(f"  default:            {default}")
print(f"  with 'fig' listed:  {custom}")
