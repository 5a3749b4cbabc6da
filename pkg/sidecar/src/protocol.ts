/**
 * Line protocol shared with the localization pipeline.
 *
 * Handshake (one line, on startup):
 *   {"ready": true, "feature_dim": N, "name": "..."}
 *
 * Request (one JSON object per line):
 *   {"id": "...", "mode": "score" | "feature", "texts": ["...", ...]}
 *
 * Response (one line per non-blank request line, echoing the id):
 *   {"id": "...", "scores": [...]} or {"id": "...", "features": [[...], ...]}
 *   {"id": <id or null>, "error": "..."} for malformed requests.
 *
 * Blank lines are ignored.
 */

export type Mode = 'score' | 'feature';

export interface ChunkRequest {
  id: string;
  mode: Mode;
  texts: string[];
}

export interface Handshake {
  ready: true;
  feature_dim: number;
  name: string;
}

export type Reply =
  | { id: string; scores: number[] }
  | { id: string; features: number[][] }
  | { id: string | null; error: string };

export class ProtocolError extends Error {
  constructor(message: string, readonly requestId: string | null) {
    super(message);
  }
}

/** Parse one request line; throws ProtocolError with whatever id is salvageable. */
export function parseRequest(line: string): ChunkRequest {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    throw new ProtocolError('request line is not valid JSON', null);
  }
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    throw new ProtocolError('request must be a JSON object', null);
  }
  const obj = raw as Record<string, unknown>;
  const id = typeof obj.id === 'string' ? obj.id : null;
  if (id === null) {
    throw new ProtocolError('request is missing a string "id"', null);
  }
  if (obj.mode !== 'score' && obj.mode !== 'feature') {
    throw new ProtocolError(`unknown mode ${JSON.stringify(obj.mode)}`, id);
  }
  if (
    !Array.isArray(obj.texts) ||
    obj.texts.length === 0 ||
    !obj.texts.every((t) => typeof t === 'string')
  ) {
    throw new ProtocolError('"texts" must be a non-empty list of strings', id);
  }
  return { id, mode: obj.mode, texts: obj.texts as string[] };
}

/** Keep only the first `maxTokens` whitespace-delimited tokens. */
export function truncateTokens(text: string, maxTokens: number): string {
  const tokens = text.split(/\s+/).filter((t) => t.length > 0);
  if (tokens.length <= maxTokens) {
    return text;
  }
  return tokens.slice(0, maxTokens).join(' ');
}
