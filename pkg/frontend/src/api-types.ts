// Generated from api-schema.json by scripts/gen-types.mjs -- do not edit.

export type Label = "matching" | "non-matching";

export interface SessionStatus {
  total: number;
  labeled: number;
  crowdsourced: number;
  deduced: number;
  published_open: number;
  open_hits: number;
  complete: boolean;
}

export interface HitPair {
  pair_id: string;
  left: string;
  right: string;
  left_record: Record<string, string>;
  right_record: Record<string, string>;
}

export interface HitView {
  hit_id: string;
  replicas: number;
  pairs: HitPair[];
  answered: string[];
  open: string[];
}

export interface AnswerResponse {
  accepted: boolean;
  finalized: boolean;
  newly_published: string[];
  newly_deduced: [string, Label][];
}

export interface SessionCreated {
  session_id: string;
  published: string[];
  open_hits: number;
  complete: boolean;
}

export interface QualificationQuiz {
  pairs: { index: number; left: string; right: string }[];
}

export interface QualificationResult {
  passed: boolean;
}
