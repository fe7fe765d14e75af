import { readFileSync } from 'node:fs';

import type { LabelEntry, ScoreEntry, ScorePair } from './contract.js';

// Mirrors the pipeline's tokenizer: lowercase, unicode word characters,
// underscore excluded.
const TOKEN_RE = /[\p{L}\p{N}]+/gu;

export function tokenize(text: string): string[] {
  return text.toLowerCase().match(TOKEN_RE) ?? [];
}

export function jaccard(a: string, b: string): number {
  const left = new Set(tokenize(a));
  const right = new Set(tokenize(b));
  let inter = 0;
  for (const tok of left) {
    if (right.has(tok)) inter += 1;
  }
  const union = left.size + right.size - inter;
  return union === 0 ? 0 : inter / union;
}

// Same heuristic the pipeline falls back to when no classifier is up:
// an answer needs clarification unless it has no yes/no token and
// at least four tokens.
export function classifyAnswer(answer: string): LabelEntry {
  const toks = tokenize(answer);
  const need = toks.includes('yes') || toks.includes('no') || toks.length < 4;
  return {
    label: need ? 'need_clarify' : 'no_need_clarify',
    need_clarify: need,
    prob: need ? 0.9 : 0.1,
  };
}

export interface Slot {
  name: string;
  task: 'rank_single' | 'rank_multitask' | 'classify';
  loaded: boolean;
  score(pairs: ScorePair[]): ScoreEntry[];
}

// Degenerate slot: token Jaccard on all three heads, the same numbers the
// pipeline's in-process lexical scorer produces. Needs no model weights.
export function echoSlot(): Slot {
  return {
    name: 'echo',
    task: 'rank_multitask',
    loaded: true,
    score: (pairs) =>
      pairs.map((p) => {
        const j = jaccard(p.context, p.question);
        return { prob: j, mrr: j, ndcg: j };
      }),
  };
}

const PRECOMPUTED_HEADER = 'context\tquestion\tprob\tmrr\tndcg';

// Serves scores exported from an offline run of a trained ranker; pairs the
// export never saw fall back to echo scores so responses stay total.
export function precomputedSlot(source: string): Slot {
  const table = new Map<string, ScoreEntry>();
  const lines = readFileSync(source, 'utf-8').split('\n');
  lines.forEach((line, i) => {
    if (line === '' || (i === 0 && line === PRECOMPUTED_HEADER)) return;
    const cols = line.split('\t');
    if (cols.length !== 5) {
      throw new Error(`${source}:${i + 1}: expected 5 columns, got ${cols.length}`);
    }
    const [context, question, prob, mrr, ndcg] = cols;
    const entry = { prob: Number(prob), mrr: Number(mrr), ndcg: Number(ndcg) };
    for (const v of [entry.prob, entry.mrr, entry.ndcg]) {
      if (!Number.isFinite(v) || v < 0 || v > 1) {
        throw new Error(`${source}:${i + 1}: scores must be numbers in [0, 1]`);
      }
    }
    const key = `${context}\t${question}`;
    if (table.has(key)) {
      throw new Error(`${source}:${i + 1}: duplicate (context, question) pair`);
    }
    table.set(key, entry);
  });
  const echo = echoSlot();
  return {
    name: 'precomputed',
    task: 'rank_multitask',
    loaded: true,
    score: (pairs) =>
      pairs.map((p) => table.get(`${p.context}\t${p.question}`) ?? echo.score([p])[0]),
  };
}

function unloadedSlot(name: string, reason: string): Slot {
  return {
    name,
    task: 'rank_multitask',
    loaded: false,
    score: () => {
      throw new Error(`slot ${name} is not loaded: ${reason}`);
    },
  };
}

export function loadSlot(name: string, source?: string): Slot {
  if (name === 'echo') return echoSlot();
  if (name === 'precomputed') {
    if (!source) return unloadedSlot(name, 'MODEL_SOURCE is not set');
    try {
      return precomputedSlot(source);
    } catch (err) {
      return unloadedSlot(name, String(err));
    }
  }
  return unloadedSlot(name, `unknown slot ${JSON.stringify(name)}`);
}
