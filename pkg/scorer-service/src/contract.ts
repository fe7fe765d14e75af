import { z } from 'zod';

// Wire protocol shared with the Python pipeline's remote scorer client.
// Responses are order-aligned with requests and the same length, always.

export const ScorePairSchema = z.object({
  context: z.string(),
  question: z.string(),
});

export const ScoreRequestSchema = z.object({
  pairs: z.array(ScorePairSchema),
});

export const ScoreEntrySchema = z.object({
  prob: z.number().min(0).max(1),
  mrr: z.number().min(0).max(1),
  ndcg: z.number().min(0).max(1),
});

export const ScoreResponseSchema = z.object({
  scores: z.array(ScoreEntrySchema),
});

export const ClassifyItemSchema = z.object({
  question: z.string(),
  answer: z.string(),
});

export const ClassifyRequestSchema = z.object({
  items: z.array(ClassifyItemSchema),
});

export const LabelEntrySchema = z.object({
  label: z.enum(['need_clarify', 'no_need_clarify']),
  need_clarify: z.boolean(),
  prob: z.number().min(0).max(1),
});

export const ClassifyResponseSchema = z.object({
  labels: z.array(LabelEntrySchema),
});

export type ScorePair = z.infer<typeof ScorePairSchema>;
export type ScoreEntry = z.infer<typeof ScoreEntrySchema>;
export type LabelEntry = z.infer<typeof LabelEntrySchema>;
