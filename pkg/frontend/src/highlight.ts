// Turns (text, annotations) into a gapless sequence of segments to render.
//
// Annotation offsets count Unicode code points, but JavaScript strings are
// indexed by UTF-16 units, so anything outside the BMP (𝕏, emoji) makes the
// two disagree. This module is the single place where that conversion
// happens: segments keep the code-point offsets and carry their text slice
// with them, so no other code ever does offset arithmetic.

export class InvariantViolation extends Error {
  constructor(message: string) {
    super(message);
    this.name = "InvariantViolation";
  }
}

export interface SpanLike {
  term_id: string;
  start: number; // code points, 0-based
  end: number;   // exclusive
}

export interface HighlightSegment {
  start: number;          // code-point offsets, half-open
  end: number;
  termId: string | null;  // null marks an unannotated stretch
  text: string;           // the exact slice of the source text
}

export function computeHighlightSegments(
  text: string,
  annotations: readonly SpanLike[],
): HighlightSegment[] {
  // utf16At[i] is the UTF-16 index where code point i starts; the extra
  // final entry makes utf16At[scalarLength] === text.length.
  const utf16At: number[] = [];
  let units = 0;
  for (const ch of text) {
    utf16At.push(units);
    units += ch.length;
  }
  utf16At.push(units);
  const scalarLength = utf16At.length - 1;

  const slice = (from: number, to: number) =>
    text.slice(utf16At[from], utf16At[to]);

  const ordered = [...annotations].sort(
    (a, b) => a.start - b.start || a.end - b.end,
  );

  const segments: HighlightSegment[] = [];
  let cursor = 0;
  for (const ann of ordered) {
    const where = `${ann.term_id} at ${ann.start}..${ann.end}`;
    if (
      !Number.isInteger(ann.start) || !Number.isInteger(ann.end) ||
      ann.start < 0 || ann.end > scalarLength || ann.start >= ann.end
    ) {
      throw new InvariantViolation(
        `annotation ${where} does not fit text of length ${scalarLength}`);
    }
    if (ann.start < cursor) {
      throw new InvariantViolation(`annotation ${where} overlaps an earlier one`);
    }
    if (cursor < ann.start) {
      segments.push({ start: cursor, end: ann.start, termId: null,
                      text: slice(cursor, ann.start) });
    }
    segments.push({ start: ann.start, end: ann.end, termId: ann.term_id,
                    text: slice(ann.start, ann.end) });
    cursor = ann.end;
  }
  if (cursor < scalarLength) {
    segments.push({ start: cursor, end: scalarLength, termId: null,
                    text: slice(cursor, scalarLength) });
  }
  return segments;
}
