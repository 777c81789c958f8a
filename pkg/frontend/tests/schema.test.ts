import { readFileSync } from 'node:fs';
import { resolve } from 'node:path';
import { describe, expect, it } from 'vitest';

import {
  ACTIONS,
  AnnotationSubmission,
  LABELS,
  validateSubmission,
} from '../src/schema.js';

// vitest runs with cwd at frontend/; the fixture is shared with the
// Python service tests one directory up.
const sharedFixturePath = resolve(
  process.cwd(),
  '../tests/fixtures/shared_submission.json',
);

function sharedSubmission(): AnnotationSubmission {
  return JSON.parse(readFileSync(sharedFixturePath, 'utf-8'));
}

describe('schema parity with the service', () => {
  it('accepts the shared fixture the server accepts verbatim', () => {
    expect(validateSubmission(sharedSubmission())).toEqual([]);
  });

  it('serializes the shared fixture with all ten actions intact', () => {
    const submission = sharedSubmission();
    const roundTripped = JSON.parse(JSON.stringify(submission));
    expect(Object.keys(roundTripped.labels).sort()).toEqual(
      [...ACTIONS].sort(),
    );
    expect(roundTripped).toEqual(submission);
  });

  it('exposes exactly the ten canonical actions and three labels', () => {
    expect(ACTIONS).toHaveLength(10);
    expect(new Set(ACTIONS).size).toBe(10);
    expect(LABELS).toEqual(['UNSAFE', 'SAFE', 'REASONABLE']);
  });

  it('flags a missing action', () => {
    const submission = sharedSubmission();
    delete submission.labels['STOP'];
    expect(validateSubmission(submission)).toEqual([
      'missing label for STOP',
    ]);
  });

  it('flags an unknown action and a bad label', () => {
    const submission = sharedSubmission();
    submission.labels['FLY'] = 'SAFE';
    submission.labels['STOP'] = 'MAYBE';
    const problems = validateSubmission(submission);
    expect(problems).toContain('unknown action FLY');
    expect(problems).toContain('invalid label MAYBE for STOP');
  });

  it('flags empty identifiers', () => {
    const submission = sharedSubmission();
    submission.task_id = '';
    submission.annotator_id = '';
    const problems = validateSubmission(submission);
    expect(problems).toContain('task_id is empty');
    expect(problems).toContain('annotator_id is empty');
  });
});
