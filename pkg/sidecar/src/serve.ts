/**
 * Request loop: one JSON reply per non-blank request line.
 *
 * The loop never dies on bad input; malformed lines get an error object
 * and processing continues.  Texts are capped at `maxTokens` whitespace
 * tokens before they reach the backbone.
 */

import { createInterface } from 'node:readline';
import type { Readable, Writable } from 'node:stream';

import type { Backbone } from './backbone.js';
import { Handshake, ProtocolError, Reply, parseRequest, truncateTokens } from './protocol.js';

export interface ServeConfig {
  backbone: Backbone;
  maxTokens: number;
}

export function handshakeLine(config: ServeConfig): string {
  const handshake: Handshake = {
    ready: true,
    feature_dim: config.backbone.featureDim,
    name: config.backbone.name,
  };
  return JSON.stringify(handshake);
}

export async function handleLine(line: string, config: ServeConfig): Promise<Reply | null> {
  const trimmed = line.trim();
  if (trimmed.length === 0) {
    return null;
  }
  let request;
  try {
    request = parseRequest(trimmed);
  } catch (err) {
    if (err instanceof ProtocolError) {
      return { id: err.requestId, error: err.message };
    }
    return { id: null, error: String(err) };
  }
  try {
    const texts = request.texts.map((t) => truncateTokens(t, config.maxTokens));
    if (request.mode === 'score') {
      const scores = await config.backbone.scores(texts);
      return { id: request.id, scores };
    }
    const features = await config.backbone.features(texts);
    return { id: request.id, features };
  } catch (err) {
    return { id: request.id, error: err instanceof Error ? err.message : String(err) };
  }
}

/** Serve one connection: handshake, then the request/reply loop. */
export async function serve(
  input: Readable,
  output: Writable,
  config: ServeConfig,
): Promise<void> {
  output.write(handshakeLine(config) + '\n');
  const lines = createInterface({ input, crlfDelay: Infinity });
  for await (const line of lines) {
    const reply = await handleLine(line, config);
    if (reply !== null) {
      output.write(JSON.stringify(reply) + '\n');
    }
  }
}
