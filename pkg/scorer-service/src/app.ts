import express, { type NextFunction, type Request, type Response } from 'express';

import { ClassifyRequestSchema, ScoreRequestSchema } from './contract.js';
import { classifyAnswer, type Slot } from './scoring.js';

export function buildApp(slot: Slot) {
  const app = express();
  app.use(express.json({ limit: '4mb' }));

  app.get('/healthz', (_req: Request, res: Response) => {
    if (!slot.loaded) {
      res.status(503).json({ status: 'unavailable', slot: slot.name });
      return;
    }
    res.json({ status: 'ok', slot: slot.name });
  });

  app.post('/v1/score', (req: Request, res: Response) => {
    if (!slot.loaded) {
      res.status(503).json({ error: `slot ${slot.name} is not loaded` });
      return;
    }
    const parsed = ScoreRequestSchema.safeParse(req.body);
    if (!parsed.success) {
      res.status(400).json({ error: parsed.error.issues[0]?.message ?? 'invalid body' });
      return;
    }
    res.json({ scores: slot.score(parsed.data.pairs) });
  });

  app.post('/v1/classify', (req: Request, res: Response) => {
    if (!slot.loaded) {
      res.status(503).json({ error: `slot ${slot.name} is not loaded` });
      return;
    }
    const parsed = ClassifyRequestSchema.safeParse(req.body);
    if (!parsed.success) {
      res.status(400).json({ error: parsed.error.issues[0]?.message ?? 'invalid body' });
      return;
    }
    res.json({ labels: parsed.data.items.map((item) => classifyAnswer(item.answer)) });
  });

  // body-parser JSON syntax errors would otherwise render an HTML 400 page
  app.use((err: unknown, _req: Request, res: Response, next: NextFunction) => {
    if (err instanceof SyntaxError) {
      res.status(400).json({ error: 'request body is not valid JSON' });
      return;
    }
    next(err);
  });

  return app;
}
