import { buildApp } from './app.js';
import { loadSlot } from './scoring.js';

const port = Number(process.env.PORT ?? 8080);
const slot = loadSlot(process.env.SLOT ?? 'echo', process.env.MODEL_SOURCE);
const app = buildApp(slot);

app.listen(port, () => {
  const state = slot.loaded ? 'loaded' : 'NOT LOADED';
  console.log(`scorer-service listening on :${port} (slot=${slot.name}, ${state})`);
});
