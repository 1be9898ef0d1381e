import { AnnotationApi } from './api.js';
import { RatingApp } from './app.js';

/**
 * Entry point when served by `forge annotate-serve --static frontend/dist`.
 *
 * Query parameters: ?session=<id>&rater=<name>; without a session id the
 * bootstrap form creates one.
 */
async function boot(): Promise<void> {
  const root = document.getElementById('app');
  if (!root) return;
  const params = new URLSearchParams(window.location.search);
  const session = params.get('session');
  const rater = params.get('rater');

  if (session && rater) {
    const app = new RatingApp(root, '', session, rater);
    await app.start();
    return;
  }

  root.innerHTML = `
    <form id="boot" class="boot">
      <h2>Start rating</h2>
      <label>Rater <input name="rater" required placeholder="your name"></label>
      <label>Session <input name="session" placeholder="sess-... (blank to create)"></label>
      <label>Framework
        <select name="framework">
          <option value="eu-ai-act">EU AI Act</option>
          <option value="gdpr">GDPR</option>
        </select>
      </label>
      <label>Sample size <input name="sample_size" type="number" value="50"></label>
      <label>RNG seed <input name="rng_seed" type="number" value="0"></label>
      <button type="submit">Begin</button>
    </form>`;

  document.getElementById('boot')!.addEventListener('submit', async (event) => {
    event.preventDefault();
    const data = new FormData(event.target as HTMLFormElement);
    let sessionId = String(data.get('session') ?? '').trim();
    if (!sessionId) {
      const api = new AnnotationApi('');
      const info = await api.createSession(
        String(data.get('framework')),
        Number(data.get('sample_size') ?? 50),
        Number(data.get('rng_seed') ?? 0),
      );
      sessionId = info.session_id;
    }
    const query = new URLSearchParams({
      session: sessionId,
      rater: String(data.get('rater')),
    });
    window.location.search = query.toString();
  });
}

void boot();
