import type { CasePayload, Report, RatingSubmission, SessionInfo } from './types.js';

/**
 * Thin fetch client for the annotation service. Errors carry the server's
 * JSON error message when one is present.
 */
export class AnnotationApi {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const message = (payload as { error?: string }).error ?? `HTTP ${response.status}`;
      throw new Error(message);
    }
    return payload as T;
  }

  createSession(framework: string, sampleSize: number, rngSeed: number): Promise<SessionInfo> {
    return this.request<SessionInfo>('POST', '/api/sessions', {
      framework,
      sample_size: sampleSize,
      rng_seed: rngSeed,
    });
  }

  nextCase(sessionId: string, rater: string): Promise<CasePayload> {
    const query = new URLSearchParams({ rater });
    return this.request<CasePayload>('GET', `/api/sessions/${sessionId}/next?${query}`);
  }

  submitRating(sessionId: string, rating: RatingSubmission): Promise<{ ok: boolean }> {
    return this.request<{ ok: boolean }>('POST', `/api/sessions/${sessionId}/ratings`, rating);
  }

  report(sessionId: string): Promise<Report> {
    return this.request<Report>('GET', `/api/sessions/${sessionId}/report`);
  }
}
