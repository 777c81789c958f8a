/**
 * Client-side mirror of the annotation service schema. Kept in lockstep
 * with the server validator via a shared fixture test.
 */

export const ACTIONS = [
  'MERGE LEFT',
  'TURN LEFT',
  'NUDGE LEFT',
  'STRAIGHT',
  'STOP',
  'ACCELERATE',
  'DECELERATE',
  'NUDGE RIGHT',
  'TURN RIGHT',
  'MERGE RIGHT',
] as const;

export const LABELS = ['UNSAFE', 'SAFE', 'REASONABLE'] as const;

export type Action = (typeof ACTIONS)[number];
export type Label = (typeof LABELS)[number];

export interface AnnotationTask {
  task_id: string;
  description: string;
  image_url: string | null;
  agent_types: string[];
  relative_positions: string[];
  map_note: string;
  actions: string[];
}

export interface AnnotationSubmission {
  task_id: string;
  annotator_id: string;
  labels: Record<string, string>;
  submitted_at: string;
}

/** Returns every schema problem; an empty list means the server will accept it. */
export function validateSubmission(submission: AnnotationSubmission): string[] {
  const problems: string[] = [];
  if (!submission.task_id) problems.push('task_id is empty');
  if (!submission.annotator_id) problems.push('annotator_id is empty');
  for (const action of ACTIONS) {
    const label = submission.labels[action];
    if (label === undefined) {
      problems.push(`missing label for ${action}`);
    } else if (!(LABELS as readonly string[]).includes(label)) {
      problems.push(`invalid label ${label} for ${action}`);
    }
  }
  for (const key of Object.keys(submission.labels)) {
    if (!(ACTIONS as readonly string[]).includes(key)) {
      problems.push(`unknown action ${key}`);
    }
  }
  return problems;
}
