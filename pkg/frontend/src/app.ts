import { AnnotationApi } from './api.js';
import {
  CasePayload,
  DIMENSIONS,
  DIMENSION_LABELS,
  Dimension,
  Report,
} from './types.js';

const FIELD_ORDER = [
  'parties_involved',
  'factual_background',
  'legal_issues',
  'arguments',
  'jurisdiction',
];

const FIELD_TITLES: Record<string, string> = {
  parties_involved: 'Parties involved',
  factual_background: 'Factual background',
  legal_issues: 'Legal issues',
  arguments: 'Arguments',
  jurisdiction: 'Jurisdiction',
};

/**
 * The rating screen. All state of record lives server-side: the component
 * only holds the scores currently entered into the form, so reloading the
 * page resumes at whatever case the server says is next.
 */
export class RatingApp {
  private readonly api: AnnotationApi;
  private current: CasePayload | null = null;
  private scores: Partial<Record<Dimension, number>> = {};
  private activeDimension = 0;

  constructor(
    private readonly root: HTMLElement,
    baseUrl: string,
    private readonly sessionId: string,
    private readonly rater: string,
  ) {
    this.api = new AnnotationApi(baseUrl);
    this.onKeydown = this.onKeydown.bind(this);
  }

  async start(): Promise<void> {
    this.root.ownerDocument.addEventListener('keydown', this.onKeydown);
    await this.advance();
  }

  stop(): void {
    this.root.ownerDocument.removeEventListener('keydown', this.onKeydown);
  }

  private async advance(): Promise<void> {
    try {
      const payload = await this.api.nextCase(this.sessionId, this.rater);
      this.current = payload;
      this.scores = {};
      this.activeDimension = 0;
      if (payload.done) {
        await this.renderSummary();
      } else {
        this.renderCase(payload);
      }
    } catch (error) {
      this.renderFatal(error);
    }
  }

  private onKeydown(event: KeyboardEvent): void {
    if (!this.current || this.current.done) return;
    if (event.key >= '1' && event.key <= '5') {
      const dimension = DIMENSIONS[this.activeDimension];
      this.setScore(dimension, Number(event.key));
      this.activeDimension = Math.min(this.activeDimension + 1, DIMENSIONS.length - 1);
      this.refreshForm();
    }
  }

  private setScore(dimension: Dimension, value: number): void {
    if (value < 1 || value > 5) return;
    this.scores[dimension] = value;
  }

  private renderCase(payload: CasePayload): void {
    const fields = payload.fields ?? {};
    const fieldPanels = FIELD_ORDER.filter((name) => name in fields)
      .map(
        (name) => `
        <section class="field" data-testid="field-${name}">
          <h3>${FIELD_TITLES[name] ?? name}</h3>
          <p>${escapeHtml(fields[name])}</p>
        </section>`,
      )
      .join('');

    this.root.innerHTML = `
      <header>
        <span data-testid="progress">${payload.progress.rated} / ${payload.progress.total} rated</span>
        <span data-testid="case-id">${payload.case_id ?? ''}</span>
      </header>
      <main class="split">
        <aside class="seed" data-testid="seed-panel">
          <h2>Statute seed</h2>
          <pre>${escapeHtml(payload.seed_text ?? '')}</pre>
        </aside>
        <article class="case" data-testid="case-panel">
          <h2>Case ${String((payload.index ?? 0) + 1)}</h2>
          ${fieldPanels}
        </article>
      </main>
      <form data-testid="rating-form">
        ${DIMENSIONS.map((dimension) => this.dimensionRow(dimension)).join('')}
        <p class="error" data-testid="form-error" hidden></p>
        <button type="submit" data-testid="submit">Submit rating</button>
      </form>
    `;

    const form = this.root.querySelector('form')!;
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      void this.submit();
    });
    form.addEventListener('change', (event) => {
      const input = event.target as HTMLInputElement;
      if (input.name?.startsWith('score-')) {
        this.setScore(input.name.slice('score-'.length) as Dimension, Number(input.value));
        this.activeDimension = Math.min(
          DIMENSIONS.indexOf(input.name.slice('score-'.length) as Dimension) + 1,
          DIMENSIONS.length - 1,
        );
      }
    });
    this.refreshForm();
  }

  private dimensionRow(dimension: Dimension): string {
    const options = [1, 2, 3, 4, 5]
      .map(
        (value) => `
        <label>
          <input type="radio" name="score-${dimension}" value="${value}"
                 data-testid="${dimension}-${value}">
          ${value}
        </label>`,
      )
      .join('');
    return `
      <fieldset data-testid="dimension-${dimension}">
        <legend>${DIMENSION_LABELS[dimension]} <small>(1 lowest - 5 highest)</small></legend>
        ${options}
      </fieldset>`;
  }

  private refreshForm(): void {
    for (const dimension of DIMENSIONS) {
      const value = this.scores[dimension];
      const inputs = this.root.querySelectorAll<HTMLInputElement>(
        `input[name="score-${dimension}"]`,
      );
      inputs.forEach((input) => {
        input.checked = value !== undefined && Number(input.value) === value;
      });
    }
  }

  private async submit(): Promise<void> {
    const errorBox = this.root.querySelector<HTMLElement>('[data-testid="form-error"]')!;
    const missing = DIMENSIONS.filter((dimension) => this.scores[dimension] === undefined);
    if (missing.length > 0) {
      errorBox.hidden = false;
      errorBox.textContent = `Please rate: ${missing.join(', ')}`;
      return;
    }
    if (!this.current?.case_id) return;
    try {
      await this.api.submitRating(this.sessionId, {
        case_id: this.current.case_id,
        rater: this.rater,
        alignment: this.scores.alignment!,
        coherence: this.scores.coherence!,
        relevance: this.scores.relevance!,
      });
    } catch (error) {
      // keep the entered scores; offer an explicit retry
      errorBox.hidden = false;
      errorBox.textContent = `Submission failed (${(error as Error).message}).`;
      if (!this.root.querySelector('[data-testid="retry"]')) {
        const retry = this.root.ownerDocument.createElement('button');
        retry.type = 'button';
        retry.dataset.testid = 'retry';
        retry.textContent = 'Retry';
        retry.addEventListener('click', () => void this.submit());
        errorBox.after(retry);
      }
      return;
    }
    await this.advance();
  }

  private async renderSummary(): Promise<void> {
    let report: Report;
    try {
      report = await this.api.report(this.sessionId);
    } catch (error) {
      this.renderFatal(error);
      return;
    }
    const mine = report.per_rater[this.rater] ?? {};
    const rows = DIMENSIONS.map(
      (dimension) => `
      <tr data-testid="summary-${dimension}">
        <td>${DIMENSION_LABELS[dimension]}</td>
        <td data-testid="summary-${dimension}-score">${formatPercent(mine[dimension])}</td>
        <td>${formatPercent(report.dimension_average[dimension])}</td>
      </tr>`,
    ).join('');
    this.root.innerHTML = `
      <section class="summary" data-testid="summary">
        <h2>Session complete</h2>
        <p data-testid="summary-progress">
          ${this.current?.progress.rated ?? 0} of ${this.current?.progress.total ?? 0} cases rated.
        </p>
        <table>
          <thead><tr><th>Dimension</th><th>Your score</th><th>All raters</th></tr></thead>
          <tbody>${rows}</tbody>
        </table>
      </section>
    `;
  }

  private renderFatal(error: unknown): void {
    this.root.innerHTML = `
      <p class="error" data-testid="fatal-error">
        ${escapeHtml((error as Error).message ?? String(error))}
      </p>`;
  }
}

function formatPercent(value: number | undefined): string {
  return value === undefined ? '-' : `${value.toFixed(2)}%`;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}
