/**
 * Payload shapes of the annotation service JSON API.
 */

export type Dimension = 'alignment' | 'coherence' | 'relevance';

export const DIMENSIONS: Dimension[] = ['alignment', 'coherence', 'relevance'];

export const DIMENSION_LABELS: Record<Dimension, string> = {
  alignment: 'Alignment with legal norms',
  coherence: 'Coherence',
  relevance: 'Relevance to LLM safety contexts',
};

export interface Progress {
  rated: number;
  total: number;
}

export interface CasePayload {
  done: boolean;
  progress: Progress;
  index?: number;
  case_id?: string;
  label?: string;
  seed_text?: string;
  fields?: Record<string, string>;
}

export interface SessionInfo {
  session_id: string;
  framework: string;
  case_ids: string[];
  sample_size: number;
  rng_seed: number;
}

export interface RatingSubmission {
  case_id: string;
  rater: string;
  alignment: number;
  coherence: number;
  relevance: number;
}

export interface Report {
  per_rater: Record<string, Partial<Record<Dimension, number>>>;
  dimension_average: Partial<Record<Dimension, number>>;
}
